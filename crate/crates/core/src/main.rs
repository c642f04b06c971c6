fn main() {
    std::process::exit(nvmem::cli::main());
}
