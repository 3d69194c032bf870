//! Independent reference computations: direct formulas and numerical
//! quadrature, sharing no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

#[derive(Debug, Clone, Copy)]
pub struct Physics {
    pub d: f64,
    pub tau: f64,
    pub r0: f64,
    pub d_max: f64,
}

impl Physics {
    pub const DEFAULT: Physics = Physics {
        d: 0.05,
        tau: 50.0,
        r0: 0.62,
        d_max: 2.6,
    };

    pub fn lambda(&self) -> f64 {
        (self.d * self.tau).sqrt()
    }

    /// Unnormalized profile: 1 inside r0, the sinh shape up to d_max, 0 beyond.
    pub fn shape(&self, r: f64) -> f64 {
        let l = self.lambda();
        if r <= self.r0 {
            1.0
        } else if r < self.d_max {
            self.r0 / r * ((self.d_max - r) / l).sinh() / ((self.d_max - self.r0) / l).sinh()
        } else {
            0.0
        }
    }

    /// ∫ shape · 4πr² dr by quadrature, split at r0.
    pub fn shape_mass(&self) -> f64 {
        let f = |r: f64| self.shape(r) * 4.0 * PI * r * r;
        4.0 * PI * self.r0.powi(3) / 3.0 + integrate(&f, self.r0, self.d_max, 1e-13)
    }

    /// Plateau C such that the field holds s·τ droplets.
    pub fn plateau(&self, s: f64) -> f64 {
        s * self.tau / self.shape_mass()
    }

    pub fn density(&self, s: f64, r: f64) -> f64 {
        self.plateau(s) * self.shape(r)
    }

    /// Steady control value when everything reaching d_max is lost: the
    /// source balances decay in the control sphere plus the diffusive flux
    /// through r0 of the sinh profile.
    pub fn absorbing_plateau(&self, s: f64) -> f64 {
        let l = self.lambda();
        let x = (self.d_max - self.r0) / l;
        let v0 = 4.0 * PI * self.r0.powi(3) / 3.0;
        let flux = 4.0 * PI * self.d * self.r0 * self.r0 * (1.0 / self.r0 + 1.0 / (l * x.tanh()));
        s / (v0 / self.tau + flux)
    }
}

pub fn dose_response(n: f64, n_b: f64, a: f64) -> f64 {
    1.0 - (1.0 - a).powf(n / n_b)
}
