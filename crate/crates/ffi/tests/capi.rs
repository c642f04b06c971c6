use std::ffi::{CStr, CString};
use std::ptr;

use nvmem_ffi::*;

fn last_error() -> String {
    let p = nvm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn setup() -> *mut NvmSetup {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nvm_setup_new(&mut s) }, NvmStatus::Ok);
    s
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(nvm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn enhancement_in_window() {
    let s = setup();
    let mut k = 0.0;
    assert_eq!(unsafe { nvm_enhancement(s, &mut k) }, NvmStatus::Ok);
    assert!((114.0..=130.0).contains(&k), "{k}");
    unsafe { nvm_setup_free(s) };
}

#[test]
fn null_handles_are_reported() {
    let mut k = 0.0;
    assert_eq!(unsafe { nvm_enhancement(ptr::null(), &mut k) }, NvmStatus::NullPointer);
    assert!(last_error().contains("NULL"));
    assert_eq!(unsafe { nvm_sweep_len(ptr::null()) }, 0);
    unsafe {
        nvm_setup_free(ptr::null_mut());
        nvm_sweep_free(ptr::null_mut());
        nvm_sequence_free(ptr::null_mut());
    }
}

#[test]
fn set_parameter_validates() {
    let s = setup();
    let name = CString::new("t1_e").unwrap();
    assert_eq!(unsafe { nvm_setup_set(s, name.as_ptr(), -1.0) }, NvmStatus::InvalidArgument);
    assert_eq!(unsafe { nvm_setup_set(s, name.as_ptr(), 1e-3) }, NvmStatus::Ok);
    let bogus = CString::new("nope").unwrap();
    assert_eq!(unsafe { nvm_setup_set(s, bogus.as_ptr(), 1.0) }, NvmStatus::InvalidArgument);
    assert!(last_error().contains("nope"));
    unsafe { nvm_setup_free(s) };
}

#[test]
fn analytic_populations_conserve() {
    let mut p = [0.0; 4];
    let st = unsafe { nvm_analytic_populations(1.0 / 0.17e-6, 1.0 / 0.92e-6, 1.0 / 1.6e-6, 300e-9, p.as_mut_ptr()) };
    assert_eq!(st, NvmStatus::Ok);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((p[0] - 0.759).abs() < 1e-3);
    let st = unsafe { nvm_analytic_populations(-1.0, 0.0, 0.0, 1e-9, p.as_mut_ptr()) };
    assert_eq!(st, NvmStatus::InvalidArgument);
}

#[test]
fn rabi_sweep_roundtrip() {
    let s = setup();
    let t: Vec<f64> = (0..60).map(|i| i as f64 * 10e-9).collect();
    let mut sw = ptr::null_mut();
    assert_eq!(unsafe { nvm_run_rabi(s, 4.3e6, t.as_ptr(), t.len(), &mut sw) }, NvmStatus::Ok);
    let n = unsafe { nvm_sweep_len(sw) };
    assert_eq!(n, 60);
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    unsafe {
        assert_eq!(nvm_sweep_x(sw, x.as_mut_ptr(), n), NvmStatus::Ok);
        assert_eq!(nvm_sweep_y(sw, y.as_mut_ptr(), n), NvmStatus::Ok);
        assert_eq!(nvm_sweep_y(sw, y.as_mut_ptr(), n - 1), NvmStatus::InvalidArgument);
    }
    assert_eq!(x, t);
    let key = CString::new("rabi_frequency_hz").unwrap();
    let mut f = 0.0;
    assert_eq!(unsafe { nvm_sweep_summary(sw, key.as_ptr(), &mut f) }, NvmStatus::Ok);
    assert!((f / 4.3e6 - 1.0).abs() < 0.02, "{f}");

    let mut params = [0.0; 4];
    assert_eq!(unsafe { nvm_fit_cosine(x.as_ptr(), y.as_ptr(), n, params.as_mut_ptr()) }, NvmStatus::Ok);
    assert!((params[1] / f - 1.0).abs() < 1e-6);

    let missing = CString::new("missing").unwrap();
    assert_eq!(unsafe { nvm_sweep_summary(sw, missing.as_ptr(), &mut f) }, NvmStatus::InvalidArgument);
    unsafe {
        nvm_sweep_free(sw);
        nvm_setup_free(s);
    }
}

#[test]
fn sequence_parse_emit_and_errors() {
    let text = CString::new("laser 3us\nmw1 pi\nrf1 pi\nlaser 300ns\n").unwrap();
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { nvm_sequence_parse(text.as_ptr(), &mut seq) }, NvmStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { nvm_sequence_event_count(seq, &mut n) }, NvmStatus::Ok);
    assert_eq!(n, 4);

    let mut need = 0;
    assert_eq!(unsafe { nvm_sequence_emit(seq, ptr::null_mut(), 0, &mut need) }, NvmStatus::Ok);
    let mut buf = vec![0 as std::ffi::c_char; need];
    assert_eq!(unsafe { nvm_sequence_emit(seq, buf.as_mut_ptr(), need, ptr::null_mut()) }, NvmStatus::Ok);
    let emitted = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_owned();
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { nvm_sequence_parse(emitted.as_ptr(), &mut again) }, NvmStatus::Ok);
    unsafe {
        nvm_sequence_free(again);
        nvm_sequence_free(seq);
    }

    let bad = CString::new("laser 3us\nmw9 pi\n").unwrap();
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { nvm_sequence_parse(bad.as_ptr(), &mut seq) }, NvmStatus::Parse);
    assert!(seq.is_null());
    assert!(last_error().contains(":2:"), "{}", last_error());
}

#[test]
fn config_errors_carry_location() {
    let dir = std::env::temp_dir().join(format!("nvmem-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.toml");
    std::fs::write(&path, "[register]\nt1_e = 5\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nvm_setup_load(c.as_ptr(), &mut s) }, NvmStatus::Parse);
    assert!(last_error().contains("bad.toml:2:"), "{}", last_error());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn fit_rates_recovers_rates() {
    let (a, b, g) = (1.0 / 0.17e-6, 1.0 / 0.92e-6, 1.0 / 1.6e-6);
    let t: Vec<f64> = (0..80).map(|i| i as f64 * 25e-9).collect();
    let mut total = Vec::new();
    let mut up = Vec::new();
    for &ti in &t {
        let mut p = [0.0; 4];
        unsafe { nvm_analytic_populations(a, b, g, ti, p.as_mut_ptr()) };
        total.push(p[0] + p[1]);
        up.push(p[0]);
    }
    let mut r = [0.0; 3];
    let st = unsafe { nvm_fit_rates(t.as_ptr(), total.as_ptr(), up.as_ptr(), t.len(), r.as_mut_ptr()) };
    assert_eq!(st, NvmStatus::Ok, "{}", last_error());
    for (got, want) in r.iter().zip([a, b, g]) {
        assert!((got / want - 1.0).abs() < 1e-4, "{got} vs {want}");
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/nvmem.h");
    let src = include_str!("../src/lib.rs");
    let mut n = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            n += 1;
        }
    }
    assert!(n >= 20);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/nvmem.h");
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header])
        .output();
    match out {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => panic!("no C compiler available: {e}"),
    }
}
