//! First- and second-order sidebands of the probe response.
//!
//! The cavity fluctuation is expanded as
//! `δa = A₁⁻e^{-iΩt} + A₁⁺e^{iΩt} + A₂⁻e^{-2iΩt} + A₂⁺e^{2iΩt}` (and likewise for
//! every mechanical mode). Each order is a dense linear system in the unknowns
//! `{A⁻, (A⁺)*, B_l⁻, (B_l⁺)*}`; the second order is driven by products of
//! first-order amplitudes. For one or two mechanical modes the same quantities
//! are also available in closed form (see [`closed`]).

pub mod closed;
pub mod delay;
pub mod spectrum;

use crate::error::{OmitError, Result};
use crate::linalg::CMatrix;
use crate::model::SystemConfig;
use crate::scalar::{cx, expi, im_unit, re, Cx, Real};
use crate::steady::SteadyState;

/// Unknowns of one sideband order in solver layout: `(A⁻, (A⁺)*, B⁻, (B⁺)*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SidebandBlock<T> {
    pub a_minus: Cx<T>,
    pub a_plus_conj: Cx<T>,
    pub b_minus: Vec<Cx<T>>,
    pub b_plus_conj: Vec<Cx<T>>,
}

impl<T: Real> SidebandBlock<T> {
    fn zeros(n: usize) -> Self {
        let z = re(T::zero());
        SidebandBlock { a_minus: z, a_plus_conj: z, b_minus: vec![z; n], b_plus_conj: vec![z; n] }
    }

    fn from_vector(x: &[Cx<T>], n: usize) -> Self {
        SidebandBlock {
            a_minus: x[0],
            a_plus_conj: x[1],
            b_minus: x[2..2 + n].to_vec(),
            b_plus_conj: x[2 + n..2 + 2 * n].to_vec(),
        }
    }

    /// `Σ_l g_l (B_l⁻ + (B_l⁺)*)`, the displacement-like combination entering the cavity row.
    pub(crate) fn weighted_displacement(&self, config: &SystemConfig<T>) -> Cx<T> {
        config
            .modes
            .iter()
            .zip(self.b_minus.iter().zip(&self.b_plus_conj))
            .fold(re(T::zero()), |acc, (m, (bm, bp))| acc + (*bm + *bp) * m.g)
    }
}

/// All twelve (for two modes) ansatz coefficients in physical form.
#[derive(Clone, Debug, PartialEq)]
pub struct SidebandAmplitudes<T> {
    pub a1_minus: Cx<T>,
    pub a1_plus: Cx<T>,
    pub a2_minus: Cx<T>,
    pub a2_plus: Cx<T>,
    /// Per mode `(B_{l,1}⁻, B_{l,1}⁺)`.
    pub b_first: Vec<(Cx<T>, Cx<T>)>,
    /// Per mode `(B_{l,2}⁻, B_{l,2}⁺)`.
    pub b_second: Vec<(Cx<T>, Cx<T>)>,
}

impl<T: Real> SidebandAmplitudes<T> {
    pub fn from_blocks(first: &SidebandBlock<T>, second: &SidebandBlock<T>) -> Self {
        let pairs = |b: &SidebandBlock<T>| b.b_minus.iter().zip(&b.b_plus_conj).map(|(m, p)| (*m, p.conj())).collect();
        SidebandAmplitudes {
            a1_minus: first.a_minus,
            a1_plus: first.a_plus_conj.conj(),
            a2_minus: second.a_minus,
            a2_plus: second.a_plus_conj.conj(),
            b_first: pairs(first),
            b_second: pairs(second),
        }
    }

    pub fn is_finite(&self) -> bool {
        let ok = |z: &Cx<T>| z.re.is_finite() && z.im.is_finite();
        [self.a1_minus, self.a1_plus, self.a2_minus, self.a2_plus].iter().all(ok)
            && self.b_first.iter().chain(&self.b_second).all(|(a, b)| ok(a) && ok(b))
    }
}

/// Coefficient matrix of the sideband system at sideband frequency `nu` (Ω or 2Ω).
///
/// Row order: cavity `A⁻`, cavity `(A⁺)*`, mechanical `B_l⁻`, mechanical `(B_l⁺)*`.
pub fn sideband_matrix<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, nu: T) -> CMatrix<T> {
    let n = config.n_modes();
    let i = im_unit::<T>();
    let kappa = config.kappa();
    let delta = steady.delta_eff;
    let alpha = steady.alpha;
    let alpha_c = alpha.conj();
    let mut m = CMatrix::zeros(2 * n + 2, 2 * n + 2);
    m[(0, 0)] = cx(kappa, delta - nu);
    m[(1, 1)] = cx(kappa, -(delta + nu));
    for (l, mode) in config.modes.iter().enumerate() {
        let bm = 2 + l;
        let bp = 2 + n + l;
        let g = mode.g;
        m[(0, bm)] = i * alpha * g;
        m[(0, bp)] = i * alpha * g;
        m[(1, bm)] = -i * alpha_c * g;
        m[(1, bp)] = -i * alpha_c * g;

        m[(bm, bm)] = cx(mode.gamma, mode.omega - nu);
        m[(bm, 0)] = i * alpha_c * g;
        m[(bm, 1)] = i * alpha * g;
        m[(bp, bp)] = cx(mode.gamma, -(mode.omega + nu));
        m[(bp, 0)] = -i * alpha_c * g;
        m[(bp, 1)] = -i * alpha * g;

        if let Some(link) = config.chain_link(l) {
            let e = expi(link.theta()) * link.eta();
            m[(bm, bm + 1)] = i * e;
            m[(bm + 1, bm)] = i * e.conj();
            m[(bp, bp + 1)] = -i * e.conj();
            m[(bp + 1, bp)] = -i * e;
        }
    }
    m
}

fn singular(order: &str, e: OmitError) -> OmitError {
    OmitError::NumericalSingularity(format!("{order}-order sideband system: {e}"))
}

/// First-order sidebands for any number of mechanical modes, by direct solve.
pub fn solve_first_order_linear<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> Result<SidebandBlock<T>> {
    let n = config.n_modes();
    let eps_p = config.probe_amplitude()?;
    if eps_p == T::zero() {
        return Ok(SidebandBlock::zeros(n));
    }
    let mut rhs = vec![re(T::zero()); 2 * n + 2];
    rhs[0] = re(eps_p);
    let x = sideband_matrix(config, steady, omega).solve(&rhs).map_err(|e| singular("first", e))?;
    Ok(SidebandBlock::from_vector(&x, n))
}

/// Right-hand side of the second-order system built from first-order amplitudes.
fn second_order_rhs<T: Real>(config: &SystemConfig<T>, first: &SidebandBlock<T>) -> Vec<Cx<T>> {
    let n = config.n_modes();
    let i = im_unit::<T>();
    let disp = first.weighted_displacement(config);
    let beat = first.a_plus_conj * first.a_minus;
    let mut rhs = vec![re(T::zero()); 2 * n + 2];
    rhs[0] = -i * first.a_minus * disp;
    rhs[1] = i * first.a_plus_conj * disp;
    for (l, mode) in config.modes.iter().enumerate() {
        rhs[2 + l] = -i * beat * mode.g;
        rhs[2 + n + l] = i * beat * mode.g;
    }
    rhs
}

/// Second-order result: the direct solve and, alongside it, the closed-form `A₂⁻`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrder<T> {
    pub block: SidebandBlock<T>,
    pub closed_form_a_minus: Cx<T>,
}

impl<T: Real> SecondOrder<T> {
    /// Relative disagreement between the two routes for `A₂⁻`.
    pub fn route_discrepancy(&self) -> T {
        crate::scalar::rel_diff(self.block.a_minus, self.closed_form_a_minus)
    }
}

/// Second-order sidebands; supported for one or two mechanical modes.
pub fn solve_second_order<T: Real>(
    config: &SystemConfig<T>,
    steady: &SteadyState<T>,
    first: &SidebandBlock<T>,
    omega: T,
) -> Result<SecondOrder<T>> {
    let n = config.n_modes();
    if n > 2 {
        return Err(OmitError::UnsupportedTopology(format!(
            "second-order sidebands are provided for at most two mechanical modes, got {n}"
        )));
    }
    let closed_form_a_minus = closed::second_order_closed_form(config, steady, omega)?;
    let rhs = second_order_rhs(config, first);
    if rhs.iter().all(|z| *z == re(T::zero())) {
        return Ok(SecondOrder { block: SidebandBlock::zeros(n), closed_form_a_minus });
    }
    let two = T::lit(2.0);
    let x = sideband_matrix(config, steady, two * omega).solve(&rhs).map_err(|e| singular("second", e))?;
    Ok(SecondOrder { block: SidebandBlock::from_vector(&x, n), closed_form_a_minus })
}

/// Both orders at one probe detuning.
pub fn solve_sidebands<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> Result<SidebandAmplitudes<T>> {
    let first = solve_first_order_linear(config, steady, omega)?;
    let second = solve_second_order(config, steady, &first, omega)?;
    Ok(SidebandAmplitudes::from_blocks(&first, &second.block))
}

/// Probe transmission `t_p = 1 − (κ/ε_p) A₁⁻` and its rate `|t_p|²`.
pub fn transmission<T: Real>(a1_minus: Cx<T>, eps_p: T, kappa: T) -> Result<(Cx<T>, T)> {
    if eps_p == T::zero() {
        return Err(OmitError::invalid("epsilon_p", "transmission is undefined without a probe"));
    }
    let t = re(T::one()) - a1_minus * (kappa / eps_p);
    Ok((t, t.norm_sqr()))
}

/// Second-order sideband efficiency `Λ_p = |κ A₂⁻ / ε_p|`, as a fraction.
pub fn second_order_efficiency<T: Real>(a2_minus: Cx<T>, eps_p: T, kappa: T) -> Result<T> {
    if eps_p == T::zero() {
        return Err(OmitError::invalid("epsilon_p", "efficiency is undefined without a probe"));
    }
    Ok((a2_minus * (kappa / eps_p)).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::steady::solve_steady_state;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn transmission_limits() {
        let (t, r) = transmission(Complex64::new(0.0, 0.0), 2.0, 3.0).unwrap();
        assert_eq!((t, r), (Complex64::new(1.0, 0.0), 1.0));
        let (_, r) = transmission(Complex64::new(2.0 / 3.0, 0.0), 2.0, 3.0).unwrap();
        assert!(r < 1e-30);
        assert!(transmission(Complex64::new(1.0, 0.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn efficiency_basics() {
        assert_eq!(second_order_efficiency(Complex64::new(0.0, 0.0), 1.0, 5.0).unwrap(), 0.0);
        assert_relative_eq!(second_order_efficiency(Complex64::new(0.0, 2.0), 4.0, 5.0).unwrap(), 2.5);
        assert!(second_order_efficiency(Complex64::new(1.0, 0.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn no_probe_no_sidebands() {
        let cfg = presets::lab_two_mode::<f64>(1.5e-3, 0.05, 1.0).with_probe_ratio(0.0);
        let s = solve_steady_state(&cfg).unwrap();
        let w = presets::lab_omega_m::<f64>();
        let first = solve_first_order_linear(&cfg, &s, w).unwrap();
        assert_eq!(first, SidebandBlock::zeros(2));
        let second = solve_second_order(&cfg, &s, &first, w).unwrap();
        assert_eq!(second.block, SidebandBlock::zeros(2));
    }

    #[test]
    fn bare_cavity_lorentzian() {
        let mut cfg = presets::lab_two_mode::<f64>(1.5e-3, 0.05, 1.0);
        for m in &mut cfg.modes {
            m.g = 0.0;
        }
        let s = solve_steady_state(&cfg).unwrap();
        let eps = cfg.probe_amplitude().unwrap();
        let omega = 0.93 * presets::lab_omega_m::<f64>();
        let a = solve_first_order_linear(&cfg, &s, omega).unwrap().a_minus;
        let expect = eps / Complex64::new(cfg.kappa(), s.delta_eff - omega);
        assert_relative_eq!(a.re, expect.re, max_relative = 1e-13);
        assert_relative_eq!(a.im, expect.im, max_relative = 1e-13);
    }

    #[test]
    fn probe_linearity() {
        let cfg = presets::lab_two_mode::<f64>(1.5e-3, 0.05, 0.3);
        let s = solve_steady_state(&cfg).unwrap();
        let w = 0.97 * presets::lab_omega_m::<f64>();
        let a = solve_sidebands(&cfg, &s, w).unwrap();
        let b = solve_sidebands(&cfg.clone().with_probe_ratio(0.1), &s, w).unwrap();
        assert!((b.a1_minus - a.a1_minus * 2.0).norm() <= 1e-12 * b.a1_minus.norm());
        assert!((b.a2_minus - a.a2_minus * 4.0).norm() <= 1e-12 * b.a2_minus.norm());
    }

    #[test]
    fn three_modes_refuse_second_order() {
        let cfg = presets::lab_n_mode::<f64>(3, 1.5e-3, 0.05, 1.0);
        let s = solve_steady_state(&cfg).unwrap();
        let first = solve_first_order_linear(&cfg, &s, 1e6).unwrap();
        assert!(matches!(solve_second_order(&cfg, &s, &first, 1e6), Err(OmitError::UnsupportedTopology(_))));
    }
}
