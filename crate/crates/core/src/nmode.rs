//! Normal modes of a uniform phonon chain and their couplings to the cavity.
//!
//! With `φ_j = Σ_{ν<j} θ_ν`, the gauge `b_j = e^{-iφ_j} c_j` removes every
//! exchange phase from an open chain, which is then diagonalized by the sine
//! transform. The combined map is `B_k = Σ_j T_kj b_j` with
//! `T_kj = e^{iφ_j} sin(jkπ/(N+1)) / A`, `A = √((N+1)/2)`.

use crate::error::{OmitError, Result};
use crate::linalg::CMatrix;
use crate::model::SystemConfig;
use crate::scalar::{cx, expi, im_unit, re, Cx, Real};
use crate::sidebands::spectrum::{compute_spectrum, OmegaGrid, Spectrum};
use crate::steady::SteadyState;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalModeBasis<T> {
    pub n: usize,
    /// `Ω_k = ω_m + 2η cos(kπ/(N+1))`, k = 1..N.
    pub frequencies: Vec<T>,
    /// Maps bare amplitudes `b_j` to normal-mode amplitudes `B_k` (row k, column j).
    pub transform: CMatrix<T>,
    /// Cavity coupling of each normal mode, `T·(G₁, …, G_N)`.
    pub effective_couplings: Vec<Cx<T>>,
    /// `φ_j`, j = 1..N.
    pub phase_accumulator: Vec<T>,
}

fn sine_norm<T: Real>(n: usize) -> T {
    (T::of_usize(n + 1) / T::lit(2.0)).sqrt()
}

/// Normal-mode basis of `n` identical modes with uniform exchange `eta` and link
/// phases `thetas` (length `n − 1`), each coupled to the cavity with strength `g`.
pub fn build_normal_modes<T: Real>(n: usize, omega_m: T, eta: T, thetas: &[T], g: T) -> Result<NormalModeBasis<T>> {
    build_with_couplings(n, omega_m, eta, thetas, &vec![g; n])
}

fn build_with_couplings<T: Real>(n: usize, omega_m: T, eta: T, thetas: &[T], g: &[T]) -> Result<NormalModeBasis<T>> {
    if n == 0 {
        return Err(OmitError::invalid("n", "a phonon chain needs at least one mode"));
    }
    if thetas.len() != n - 1 {
        return Err(OmitError::invalid("theta", format!("expected {} link phases, got {}", n - 1, thetas.len())));
    }
    let mut phase_accumulator = Vec::with_capacity(n);
    let mut phi = T::zero();
    for j in 0..n {
        phase_accumulator.push(phi);
        if j + 1 < n {
            phi += thetas[j];
        }
    }
    let a = sine_norm::<T>(n);
    let step = T::PI() / T::of_usize(n + 1);
    let transform = CMatrix::from_fn(n, n, |k, j| {
        let s = (T::of_usize((j + 1) * (k + 1)) * step).sin() / a;
        expi(phase_accumulator[j]) * s
    });
    let frequencies = (1..=n).map(|k| omega_m + T::lit(2.0) * eta * (T::of_usize(k) * step).cos()).collect();
    let effective_couplings = transform.matvec(&g.iter().map(|&x| re(x)).collect::<Vec<_>>());
    Ok(NormalModeBasis { n, frequencies, transform, effective_couplings, phase_accumulator })
}

/// Basis for a uniform chain configuration, with couplings `G_l = g_l|α|`.
pub fn normal_modes_for<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>) -> Result<NormalModeBasis<T>> {
    if !config.is_uniform() {
        return Err(OmitError::UnsupportedTopology("the normal-mode picture needs identical modes and uniform η".into()));
    }
    let eta = config.couplings.first().map_or(T::zero(), |c| c.eta());
    let thetas: Vec<T> = config.couplings.iter().map(|c| c.theta()).collect();
    build_with_couplings(config.n_modes(), config.modes[0].omega, eta, &thetas, &steady.linearized_couplings(config))
}

/// Closed-form cavity coupling of even normal mode `k` when only θ₁ is nonzero.
pub fn even_mode_coupling<T: Real>(n: usize, k: usize, g: T, theta1: T) -> Result<Cx<T>> {
    if !k.is_multiple_of(2) || k == 0 || k > n {
        return Err(OmitError::invalid("k", format!("need an even mode index in 1..={n}, got {k}")));
    }
    let s = (T::of_usize(k) * T::PI() / T::of_usize(n + 1)).sin();
    Ok((re(T::one()) - expi(theta1)) * (g / sine_norm::<T>(n) * s))
}

/// First-order transmission spectrum for any number of modes.
pub fn n_mode_spectrum<T: Real>(config: &SystemConfig<T>, grid: &OmegaGrid) -> Result<Spectrum<T>> {
    compute_spectrum(config, grid)
}

/// Probe transmission `t_p` computed with the cavity coupled to the normal modes.
pub fn normal_mode_transmission<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> Result<Cx<T>> {
    let basis = normal_modes_for(config, steady)?;
    let n = basis.n;
    let i = im_unit::<T>();
    let kappa = config.kappa();
    let delta = steady.delta_eff;
    let alpha = steady.alpha;
    let alpha_c = alpha.conj();
    let gamma = config.modes[0].gamma;
    // Single-photon couplings in the rotated basis.
    let c: Vec<Cx<T>> = basis.transform.matvec(&config.modes.iter().map(|m| re(m.g)).collect::<Vec<_>>());

    let mut m = CMatrix::zeros(2 * n + 2, 2 * n + 2);
    m[(0, 0)] = cx(kappa, delta - omega);
    m[(1, 1)] = cx(kappa, -(delta + omega));
    for k in 0..n {
        let (bm, bp) = (2 + k, 2 + n + k);
        m[(0, bm)] = i * alpha * c[k].conj();
        m[(0, bp)] = i * alpha * c[k];
        m[(1, bm)] = -i * alpha_c * c[k].conj();
        m[(1, bp)] = -i * alpha_c * c[k];
        m[(bm, bm)] = cx(gamma, basis.frequencies[k] - omega);
        m[(bm, 0)] = i * alpha_c * c[k];
        m[(bm, 1)] = i * alpha * c[k];
        m[(bp, bp)] = cx(gamma, -(basis.frequencies[k] + omega));
        m[(bp, 0)] = -i * alpha_c * c[k].conj();
        m[(bp, 1)] = -i * alpha * c[k].conj();
    }
    let eps_p = config.probe_amplitude()?;
    let mut rhs = vec![re(T::zero()); 2 * n + 2];
    rhs[0] = re(eps_p);
    let x = m.solve(&rhs)?;
    Ok(crate::sidebands::transmission(x[0], eps_p, kappa)?.0)
}
