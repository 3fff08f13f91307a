//! Adaptive Gauss–Kronrod (7/15) quadrature used by the library proper.
//! The oracles deliberately use a different rule (adaptive Simpson).

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` (or relative
/// tolerance `rel_tol` of the running total, whichever is looser).
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut intervals = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let (total, err): (f64, f64) =
            intervals.iter().fold((0.0, 0.0), |(s, e), iv| (s + iv.2 .0, e + iv.2 .1));
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return total;
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("non-empty");
        let (lo, hi, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            intervals.push((lo, hi, (gk15(&f, lo, hi).0, 0.0)));
            continue;
        }
        intervals.push((lo, mid, gk15(&f, lo, mid)));
        intervals.push((mid, hi, gk15(&f, mid, hi)));
    }
    intervals.iter().map(|iv| iv.2 .0).sum()
}

/// Finds a cut-off beyond which `|f| < threshold` on a sampled doubling scan,
/// so that an integral over `(0, inf)` may be truncated there.
pub(crate) fn tail_cutoff<F: Fn(f64) -> f64>(f: &F, threshold: f64) -> f64 {
    let mut x = 1.0;
    while x < 1e6 {
        let quiet = (0..=32).all(|i| f(x * (1.0 + i as f64 / 32.0)).abs() < threshold);
        if quiet {
            return x;
        }
        x *= 2.0;
    }
    x
}
