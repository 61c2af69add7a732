//! Adaptive Gauss-Kronrod (7/15) quadrature, used as an independent oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_SEGMENTS: usize = 4000;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment { a, b, value: kronrod * h, error: ((kronrod - gauss) * h).abs() }
}

/// ∫_a^b f with global adaptive bisection until the summed error estimate
/// is below `max(abs_tol, rel_tol · |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let (mut total, mut error) = (first.value, first.error);
    heap.push(first);
    while error > abs_tol.max(rel_tol * total.abs()) && heap.len() < MAX_SEGMENTS {
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        let (left, right) = (gk15(&f, worst.a, mid), gk15(&f, mid, worst.b));
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed accumulated rounding from the running updates.
    heap.iter().map(|s| s.value).sum()
}

/// ∫_0^∞ f over the pieces [0, 1], [1, 2], [2, 4], ... until a piece is
/// negligible and the pieces have started to shrink.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> f64 {
    let mut total = integrate(&f, 0.0, 1.0, 1e-300, rel_tol);
    let mut prev = total.abs();
    let mut lo = 1.0;
    for _ in 0..1000 {
        let hi = 2.0 * lo;
        let piece = integrate(&f, lo, hi, 1e-300, rel_tol);
        total += piece;
        if piece.abs() <= 1e-18 * total.abs() && piece.abs() <= prev {
            break;
        }
        prev = piece.abs();
        lo = hi;
    }
    total
}

/// `E X^p = ∫_0^∞ p x^{p−1} P(X > x) dx` for X ≥ 0 given its survival function.
pub fn moment_from_tail<F: Fn(f64) -> f64>(p: f64, survival: F) -> f64 {
    integrate_half_line(|x| if x == 0.0 { if p == 1.0 { survival(0.0) } else { 0.0 } } else { p * x.powf(p - 1.0) * survival(x) }, 1e-13)
}
