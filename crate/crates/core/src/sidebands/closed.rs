//! Closed-form sideband amplitudes for one or two mechanical modes.
//!
//! A single mode is treated as a two-mode system whose second mode is an
//! uncoupled copy of the first (`g₂ = 0`, `η = 0`).
//!
//! The polynomials reach the eighth power of a frequency, so every rate is
//! measured in units of the first mechanical frequency while evaluating them;
//! the amplitudes are invariant under that rescaling of time.

use super::SidebandBlock;
use crate::error::{OmitError, Result};
use crate::model::SystemConfig;
use crate::scalar::{cx, expi, im_unit, re, Cx, Real};
use crate::steady::SteadyState;

/// The `T` polynomials of the mechanical response, evaluated at one sideband frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TCoefficients<T> {
    pub t1: Cx<T>,
    pub t2: Cx<T>,
    pub t31: Cx<T>,
    pub t32: Cx<T>,
}

/// Auxiliary coefficients of the closed forms at probe detuning `Ω`.
///
/// `first` is evaluated at `Ω`, `second` at `2Ω`; `chi1` and `chi2` are the
/// effective second-order susceptibilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxCoefficients<T> {
    pub first: TCoefficients<T>,
    pub second: TCoefficients<T>,
    pub v1: Cx<T>,
    pub v2: Cx<T>,
    pub v3: Cx<T>,
    pub chi1: Cx<T>,
    pub chi2: Cx<T>,
}

#[derive(Clone, Copy, Debug)]
struct TwoMode<T> {
    single: bool,
    kappa: T,
    delta: T,
    alpha: Cx<T>,
    g1: T,
    g2: T,
    ga1: T,
    ga2: T,
    w1: T,
    w2: T,
    eta: T,
    theta: T,
    eps: T,
    /// Unit of every rate above, rad/s.
    scale: T,
}

impl<T: Real> TwoMode<T> {
    fn new(config: &SystemConfig<T>, steady: &SteadyState<T>) -> Result<Self> {
        let modes = &config.modes;
        let (m1, m2, single) = match modes.len() {
            1 => (&modes[0], &modes[0], true),
            2 => (&modes[0], &modes[1], false),
            n => {
                return Err(OmitError::UnsupportedTopology(format!(
                    "closed forms exist for one or two mechanical modes, got {n}"
                )))
            }
        };
        let (eta, theta) = match config.chain_link(0) {
            Some(c) if !single => (c.eta(), c.theta()),
            _ => (T::zero(), T::zero()),
        };
        let u = m1.omega;
        Ok(TwoMode {
            single,
            kappa: config.kappa() / u,
            delta: steady.delta_eff / u,
            alpha: steady.alpha,
            g1: m1.g / u,
            g2: if single { T::zero() } else { m2.g / u },
            ga1: m1.gamma / u,
            ga2: m2.gamma / u,
            w1: m1.omega / u,
            w2: m2.omega / u,
            eta: eta / u,
            theta,
            eps: config.probe_amplitude()? / u,
            scale: u,
        })
    }

    fn t_coefficients(&self, nu: T) -> TCoefficients<T> {
        let two = T::lit(2.0);
        let eta2 = re(self.eta * self.eta);
        let (ga1, ga2, w1, w2) = (self.ga1, self.ga2, self.w1, self.w2);
        let t1 = re(-w1 * w2) + eta2 + cx(ga1, -nu) * cx(ga2, -nu);
        let t2 = (eta2 + cx(w1 - nu, -ga1) * cx(nu - w2, ga2)) * (eta2 + cx(ga1, -(w1 + nu)) * cx(ga2, -(w2 + nu)));
        let t31 = cx(ga1 * ga1 + w1 * w1 - nu * nu, -two * ga1 * nu) * w2 - eta2 * w1;
        let t32 = cx(ga2 * ga2 + w2 * w2 - nu * nu, -two * ga2 * nu) * w1 - eta2 * w2;
        TCoefficients { t1, t2, t31, t32 }
    }

    fn alpha2(&self) -> T {
        self.alpha.norm_sqr()
    }

    /// `g₁g₂η cos θ`, the interference weight of the phonon-exchange path.
    fn loop_weight(&self) -> T {
        self.g1 * self.g2 * self.eta * self.theta.cos()
    }

    /// `4|α|²ΔS − T₂(Δ² + (κ − iΩ)²) + 8g₁g₂η|α|²T₁Δ cos θ`.
    fn first_den(&self, t: &TCoefficients<T>, omega: T) -> Cx<T> {
        let (k, d, a2) = (self.kappa, self.delta, self.alpha2());
        let s = t.t31 * (self.g2 * self.g2) + t.t32 * (self.g1 * self.g1);
        let kw = cx(k, -omega);
        s * (T::lit(4.0) * a2 * d) - t.t2 * (kw * kw + d * d) + t.t1 * (T::lit(8.0) * self.loop_weight() * a2 * d)
    }

    fn first_order(&self, omega: T) -> Result<(SidebandBlock<T>, TCoefficients<T>, [Cx<T>; 3])> {
        let i = im_unit::<T>();
        let (two, four) = (T::lit(2.0), T::lit(4.0));
        let (k, d, a2, eps) = (self.kappa, self.delta, self.alpha2(), self.eps);
        let (g1, g2, ga1, ga2, w1, w2, eta) = (self.g1, self.g2, self.ga1, self.ga2, self.w1, self.w2, self.eta);
        let ac = self.alpha.conj();
        let e = expi(self.theta);
        let t = self.t_coefficients(omega);
        let s = t.t31 * (g2 * g2) + t.t32 * (g1 * g1);
        let lw = self.loop_weight();

        let den = self.first_den(&t, omega);
        let num = t.t2 * cx(-k, d + omega) - i * s * (two * a2) - i * t.t1 * (four * lw * a2);
        check(den, "first-order denominator")?;
        let a_minus = num / den * eps;

        let kp = cx(k, -(d + omega));
        let up = cx(d + omega, k);
        let a_plus_conj = -(ac * ac) * two * kp * (t.t1 * (two * lw) + s) / (up * den) * eps;

        let eta2 = re(eta * eta);
        let v1 = (-eta2 + cx(w1 + omega, ga1) * cx(w2 + omega, ga2)) * kp * kp;
        let v2 = (eta2 + cx(w1 - omega, -ga1) * cx(omega - w2, ga2)) * kp * kp;
        let v3 = (-eta2 + cx(omega - w1, ga1) * cx(omega - w2, ga2)) * kp;
        let ud = up * den;
        let b1m = (ac * v1 * cx(ga2, w2 - omega) * g1 - i * ac * v1 * e * (g2 * eta)) / ud * eps;
        let b2m = (ac * v1 * cx(ga1, w1 - omega) * g2 - i * ac * v1 * e.conj() * (g1 * eta)) / ud * eps;
        let b1pc = -i * v2 * (ac * cx(w2 + omega, ga2) * g1 - ac * e.conj() * (g2 * eta)) / ud * eps;
        let b2pc = (-e * ac * v3 * (g1 * eta) + ac * v3 * cx(w1 + omega, ga1) * g2) / den * eps;

        let (b_minus, b_plus_conj) = if self.single { (vec![b1m], vec![b1pc]) } else { (vec![b1m, b2m], vec![b1pc, b2pc]) };
        Ok((SidebandBlock { a_minus, a_plus_conj, b_minus, b_plus_conj }, t, [v1, v2, v3]))
    }

    fn second_order(&self, first: &SidebandBlock<T>, omega: T) -> Result<(Cx<T>, TCoefficients<T>, Cx<T>, Cx<T>)> {
        let i = im_unit::<T>();
        let (two, four) = (T::lit(2.0), T::lit(4.0));
        let nu = two * omega;
        let (k, d, a2) = (self.kappa, self.delta, self.alpha2());
        let (g1, g2) = (self.g1, self.g2);
        let al = self.alpha;
        let t = self.t_coefficients(nu);
        let s = t.t32 * (g1 * g1) + t.t31 * (g2 * g2);
        let lw = self.loop_weight();
        let path = t.t1 * (two * lw) + s;

        let am = first.a_minus;
        let apc = first.a_plus_conj;
        let zero = re(T::zero());
        let (b1m, b1pc) = (first.b_minus[0], first.b_plus_conj[0]);
        let (b2m, b2pc) = if self.single { (zero, zero) } else { (first.b_minus[1], first.b_plus_conj[1]) };
        let disp = (b1m + b1pc) * g1 + (b2m + b2pc) * g2;

        let up = cx(d + nu, k);
        let chi1_den = up * t.t2 - s * (two * a2) - t.t1 * (four * lw * a2);
        check(chi1_den, "second-order susceptibility")?;
        let chi1 = i * al * two * (al * disp - am * up) * path / chi1_den;

        // χ₂ = [1/(κ − i(Δ+2Ω)) − iT₂/D]⁻¹ written so that D → 0 stays finite.
        let dd = path * (two * a2);
        let chi2_den = dd / cx(k, -(d + nu)) - i * t.t2;
        check(chi2_den, "second-order susceptibility")?;
        let chi2 = dd / chi2_den;

        let outer = chi2 - cx(k, d - nu);
        check(outer, "second-order denominator")?;
        let a2m = (chi1 * apc + i * disp * am) / outer;
        Ok((a2m, t, chi1, chi2))
    }
}

fn check<T: Real>(z: Cx<T>, what: &str) -> Result<()> {
    if z == re(T::zero()) || !z.re.is_finite() || !z.im.is_finite() {
        Err(OmitError::NumericalSingularity(format!("{what} vanishes")))
    } else {
        Ok(())
    }
}

/// Closed-form first-order cavity sideband `A₁⁻`.
pub fn first_order_closed_form<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> Result<Cx<T>> {
    Ok(first_order_closed_block(config, steady, omega)?.a_minus)
}

/// All closed-form first-order amplitudes, in solver layout.
pub fn first_order_closed_block<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> Result<SidebandBlock<T>> {
    let tm = TwoMode::new(config, steady)?;
    Ok(tm.first_order(omega / tm.scale)?.0)
}

/// Closed-form second-order cavity sideband `A₂⁻`, fed by the closed-form first order.
pub fn second_order_closed_form<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> Result<Cx<T>> {
    let tm = TwoMode::new(config, steady)?;
    let w = omega / tm.scale;
    let (first, _, _) = tm.first_order(w)?;
    Ok(tm.second_order(&first, w)?.0)
}

/// Every auxiliary coefficient used by the closed forms at probe detuning `omega`.
pub fn aux_coefficients<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> Result<AuxCoefficients<T>> {
    let tm = TwoMode::new(config, steady)?;
    let w = omega / tm.scale;
    let (first_block, first, [v1, v2, v3]) = tm.first_order(w)?;
    let (_, second, chi1, chi2) = tm.second_order(&first_block, w)?;
    // Back to rad/s: each coefficient carries a fixed power of frequency.
    let u = tm.scale;
    let (u2, u3) = (u * u, u * u * u);
    let u4 = u2 * u2;
    let t = |c: TCoefficients<T>| TCoefficients { t1: c.t1 * u2, t2: c.t2 * u4, t31: c.t31 * u3, t32: c.t32 * u3 };
    Ok(AuxCoefficients { first: t(first), second: t(second), v1: v1 * u4, v2: v2 * u4, v3: v3 * u3, chi1: chi1 * u, chi2: chi2 * u })
}
