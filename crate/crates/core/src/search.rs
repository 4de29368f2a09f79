//! One-dimensional search primitives shared by every module.
//!
//! Sphere-wide extrema are always located with the same two-stage scheme:
//! a coarse uniform grid (4096 nodes by default) followed by golden-section
//! refinement on the bracket around the best node, down to a width of
//! 1e-12 radians. All curves handled here are piecewise smooth, and the
//! default grid is finer than the angular feature size of any polygon with
//! at most 512 vertices.

/// Default number of coarse grid nodes.
pub const DEFAULT_GRID: usize = 4096;

/// Default refinement width (radians).
pub const REFINE_WIDTH: f64 = 1e-12;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of an extremum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
}

/// Coarse-grid-then-golden-section search on a closed interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSearch {
    pub nodes: usize,
    pub width: f64,
}

impl Default for GridSearch {
    fn default() -> Self {
        GridSearch {
            nodes: DEFAULT_GRID,
            width: REFINE_WIDTH,
        }
    }
}

impl GridSearch {
    pub fn with_nodes(nodes: usize) -> Self {
        GridSearch {
            nodes: nodes.max(3),
            ..Default::default()
        }
    }

    /// Grid node `i` of `[lo, hi]` (both ends included).
    pub fn node(&self, lo: f64, hi: f64, i: usize) -> f64 {
        if i + 1 == self.nodes {
            hi
        } else {
            lo + (hi - lo) * (i as f64) / ((self.nodes - 1) as f64)
        }
    }

    /// Maximum of `f` on `[lo, hi]`. Ties on the grid go to the lowest argument.
    pub fn maximize<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Extremum {
        if hi <= lo {
            return Extremum {
                arg: lo,
                value: f(lo),
            };
        }
        let mut best_i = 0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..self.nodes {
            let v = f(self.node(lo, hi, i));
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let a = self.node(lo, hi, best_i.saturating_sub(1));
        let b = self.node(lo, hi, (best_i + 1).min(self.nodes - 1));
        let refined = golden_max(&f, a, b, self.width);
        if refined.value > best {
            refined
        } else {
            Extremum {
                arg: self.node(lo, hi, best_i),
                value: best,
            }
        }
    }

    pub fn minimize<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Extremum {
        let e = self.maximize(|t| -f(t), lo, hi);
        Extremum {
            arg: e.arg,
            value: -e.value,
        }
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping at bracket width `width`.
///
/// Returns the best point seen, including the bracket ends.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, width: f64) -> Extremum {
    let fa = f(a);
    let fb = f(b);
    let mut best = if fb > fa {
        Extremum { arg: b, value: fb }
    } else {
        Extremum { arg: a, value: fa }
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > width && iterations < 200 {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.value {
            best = Extremum { arg: x, value: v };
        }
    }
    best
}

/// Brent's bracketing root finder. Requires `f(a)` and `f(b)` of opposite sign
/// (or one of them zero); tolerates discontinuities, where it converges to the jump.
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Some(b)
}

/// Plain bisection for the boundary of a predicate: given `pred(inside) == true`
/// and `pred(outside) == false`, returns a point within `xtol` of the switch,
/// on the `inside` side.
pub fn bisect_boundary<F: FnMut(f64) -> bool>(
    mut pred: F,
    mut inside: f64,
    mut outside: f64,
    xtol: f64,
) -> f64 {
    for _ in 0..200 {
        if (outside - inside).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Composite Simpson rule over `n` (even) subintervals.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_search_finds_smooth_max() {
        let g = GridSearch::default();
        let e = g.maximize(|t| (t - 1.234).cos(), 0.0, PI);
        assert!((e.arg - 1.234).abs() < 1e-6);
        assert!((e.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_search_finds_kink_max() {
        let g = GridSearch::default();
        let e = g.maximize(|t| 1.0 - (t - 0.7).abs(), 0.0, PI);
        assert!((e.arg - 0.7).abs() < 1e-11);
    }

    #[test]
    fn brent_handles_jump() {
        let r = brent_root(|x| if x < 0.3 { -1.0 } else { 1.0 }, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.3).abs() < 1e-13);
        let r = brent_root(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn simpson_exact_on_cubic() {
        let v = simpson(|x| x * x * x - x, 0.0, 2.0, 4);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn bisect_boundary_stays_inside() {
        let b = bisect_boundary(|x| x <= 0.25, 0.0, 1.0, 1e-13);
        assert!(b <= 0.25 && 0.25 - b < 1e-12);
    }
}
