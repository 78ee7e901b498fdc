//! Dormand–Prince 5(4) with step-size control, landing exactly on an output grid.

use crate::scalar::{Cx, Real};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Tableau<T> {
    c: [T; 7],
    a: [[T; 6]; 7],
    e: [T; 7],
}

impl<T: Real> Tableau<T> {
    pub(crate) fn new() -> Self {
        Tableau { c: C.map(T::lit), a: A.map(|r| r.map(T::lit)), e: E.map(T::lit) }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Control<T> {
    pub rtol: T,
    /// Absolute tolerance per component.
    pub atol: T,
}

pub(crate) struct Stepper<'a, T, F> {
    pub f: F,
    pub tab: &'a Tableau<T>,
    pub ctl: Control<T>,
    pub y: Vec<Cx<T>>,
    pub t: T,
    /// Proposed step for the next attempt.
    pub h: T,
    k1: Option<Vec<Cx<T>>>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<'a, T: Real, F: FnMut(T, &[Cx<T>], &mut [Cx<T>])> Stepper<'a, T, F> {
    pub(crate) fn new(f: F, tab: &'a Tableau<T>, ctl: Control<T>, y0: Vec<Cx<T>>, t0: T, h0: T) -> Self {
        Stepper { f, tab, ctl, y: y0, t: t0, h: h0, k1: None, accepted: 0, rejected: 0 }
    }

    /// Advances exactly to `t_end`, taking as many adaptive steps as needed.
    pub(crate) fn advance_to(&mut self, t_end: T) {
        let n = self.y.len();
        let zero = Cx::new(T::zero(), T::zero());
        let mut k: Vec<Vec<Cx<T>>> = vec![vec![zero; n]; 7];
        let mut tmp = vec![zero; n];
        while self.t < t_end {
            let remaining = t_end - self.t;
            let landing = self.h >= remaining;
            let h = if landing { remaining } else { self.h };
            match self.k1.take() {
                Some(v) => k[0] = v,
                None => (self.f)(self.t, &self.y, &mut k[0]),
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = self.y[i];
                    for j in 0..s {
                        if self.tab.a[s][j] != T::zero() {
                            acc += k[j][i] * (h * self.tab.a[s][j]);
                        }
                    }
                    tmp[i] = acc;
                }
                let ts = self.t + self.tab.c[s] * h;
                (self.f)(ts, &tmp, &mut k[s]);
            }
            // Stage 7 was evaluated at the fifth-order solution, which is `tmp`.
            let mut err = T::zero();
            for i in 0..n {
                let mut e = zero;
                for s in 0..7 {
                    if self.tab.e[s] != T::zero() {
                        e += k[s][i] * (h * self.tab.e[s]);
                    }
                }
                let scale = self.ctl.atol + self.ctl.rtol * self.y[i].norm().max(tmp[i].norm());
                let r = e.norm() / scale;
                err += r * r;
            }
            err = (err / T::of_usize(n.max(1))).sqrt();
            let safety = T::lit(0.9);
            let factor = if err == T::zero() {
                T::lit(5.0)
            } else {
                (safety * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
            };
            if err <= T::one() {
                self.t = if landing { t_end } else { self.t + h };
                std::mem::swap(&mut self.y, &mut tmp);
                self.k1 = Some(k[6].clone());
                self.accepted += 1;
                // A clipped landing step only ever shrinks the natural step size.
                if !landing {
                    self.h = h * factor;
                } else if factor < T::one() {
                    self.h = self.h.min(h * factor);
                }
            } else {
                self.k1 = Some(k[0].clone());
                self.h = h * factor.min(T::one());
                self.rejected += 1;
            }
        }
    }
}
