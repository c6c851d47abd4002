//! The scalar helper functions of the randomized constructions and the
//! one-dimensional prox solves the pair components reduce to.

/// ψ_c(z) = max(0, |z| − c): the ε-insensitive absolute value.
/// Subgradient selection: 0 on [−c, c] (boundary included), sign(z) outside.
pub fn psi(c: f64, z: f64) -> (f64, f64) {
    debug_assert!(c >= 0.0);
    let a = z.abs();
    if a <= c {
        (0.0, 0.0)
    } else {
        (a - c, z.signum())
    }
}

/// φ_c(z): 0 on [−c, c], 2(|z| − c)² on c < |z| ≤ 2c, z² − 2c² beyond.
/// Convex, differentiable, 4-smooth; 0 ≤ z² − φ_c(z) ≤ 2c².
pub fn phi(c: f64, z: f64) -> (f64, f64) {
    debug_assert!(c >= 0.0);
    let a = z.abs();
    if a <= c {
        (0.0, 0.0)
    } else if a <= 2.0 * c {
        let t = a - c;
        (2.0 * t * t, 4.0 * t * z.signum())
    } else {
        (z * z - 2.0 * c * c, 2.0 * z)
    }
}

/// Scalar term g(s) appearing inside a prox block, with weight and inner
/// scaling: s ↦ w·g(α·s).
#[derive(Debug, Clone, Copy)]
pub enum ScalarKind {
    Abs { target: f64 },
    Psi { c: f64 },
    Phi { c: f64 },
    Quad { a: f64 },
}

impl ScalarKind {
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            ScalarKind::Abs { target } => (z - target).abs(),
            ScalarKind::Psi { c } => psi(c, z).0,
            ScalarKind::Phi { c } => phi(c, z).0,
            ScalarKind::Quad { a } => z * z - 2.0 * a * z,
        }
    }

    pub fn slope(&self, z: f64) -> f64 {
        match *self {
            ScalarKind::Abs { target } => (z - target).signum() * if z == target { 0.0 } else { 1.0 },
            ScalarKind::Psi { c } => psi(c, z).1,
            ScalarKind::Phi { c } => phi(c, z).1,
            ScalarKind::Quad { a } => 2.0 * z - 2.0 * a,
        }
    }

    /// Interval of subgradients at z (lo, hi), for kink-aware residuals.
    pub fn slope_range(&self, z: f64) -> (f64, f64) {
        match *self {
            ScalarKind::Abs { target } => {
                if (z - target).abs() <= 1e-9 * (1.0 + z.abs()) {
                    (-1.0, 1.0)
                } else {
                    let s = (z - target).signum();
                    (s, s)
                }
            }
            ScalarKind::Psi { c } => {
                let a = z.abs();
                if (a - c).abs() <= 1e-9 * (1.0 + a) {
                    if z >= 0.0 {
                        (0.0, 1.0)
                    } else {
                        (-1.0, 0.0)
                    }
                } else {
                    let s = psi(c, z).1;
                    (s, s)
                }
            }
            _ => {
                let s = self.slope(z);
                (s, s)
            }
        }
    }
}

/// One scalar term w·g(α·s + shift) inside a 1-d prox problem.
#[derive(Debug, Clone, Copy)]
pub struct ScalarTerm {
    pub w: f64,
    pub alpha: f64,
    pub shift: f64,
    pub kind: ScalarKind,
}

/// Exact minimizer of (β/2)(s − y)² + Σ_j w_j·g_j(α_j·s + shift_j) by
/// bisection on the monotone (sub)derivative. Handles jumps (kink
/// minimizers land on the kink to full precision).
pub fn scalar_prox(y: f64, beta: f64, terms: &[ScalarTerm]) -> f64 {
    let deriv = |s: f64| -> f64 {
        let mut d = beta * (s - y);
        for t in terms {
            d += t.w * t.alpha * t.kind.slope(t.alpha * s + t.shift);
        }
        d
    };
    // bracket a sign change
    let mut lo = y;
    let mut hi = y;
    let mut width = 1.0;
    while deriv(lo) > 0.0 {
        lo -= width;
        width *= 2.0;
        if width > 1e12 {
            break;
        }
    }
    width = 1.0;
    while deriv(hi) < 0.0 {
        hi += width;
        width *= 2.0;
        if width > 1e12 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d = deriv(mid);
        if d > 0.0 {
            hi = mid;
        } else if d < 0.0 {
            lo = mid;
        } else {
            return mid;
        }
        if hi - lo <= f64::EPSILON * (1.0 + hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}
