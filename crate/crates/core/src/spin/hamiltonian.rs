use super::operators::*;
use super::params::RegisterParams;

/// Static Hamiltonian in Hz over the product basis:
/// `D Sz² + γe B Sz − γn B Iz + A∥ Sz Iz + A⊥ (Sx Ix + Sy Iy)`.
pub fn build_hamiltonian(p: &RegisterParams) -> Mat6 {
    let sz = s_z();
    let c = |x: f64| C64::new(x, 0.0);
    let zfs = kron(&(sz * sz), &n_id()) * c(p.zero_field);
    let ez = kron(&sz, &n_id()) * c(p.gamma_e * p.field);
    let nz = kron(&e_id(), &i_z()) * c(-p.gamma_n * p.field);
    let secular = kron(&sz, &i_z()) * c(p.a_par);
    let flipflop = (kron(&s_x(), &i_x()) + kron(&s_y(), &i_y())) * c(p.a_perp);
    zfs + ez + nz + secular + flipflop
}

/// Coupling to a unit transverse field along x (Hz per tesla):
/// `γe Sx + γn Ix`. Electron and nuclear admixtures add in phase, so the
/// dressed nuclear element grows monotonically from the bare one.
pub fn drive_operator(p: &RegisterParams) -> Mat6 {
    kron(&s_x(), &n_id()) * C64::new(p.gamma_e, 0.0)
        + kron(&e_id(), &i_x()) * C64::new(p.gamma_n, 0.0)
}
