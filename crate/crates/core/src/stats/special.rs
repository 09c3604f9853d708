//! Log-gamma, the regularized incomplete beta function, and their inverses.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (T::PI() / (T::PI() * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(*c) / (x + T::count(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * T::TAU().ln() + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let eps = T::epsilon();
    let one = T::one();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for i in 1..10_000 {
        let m = T::count(i);
        let m2 = m + m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`.
pub fn inc_beta<T: Real>(a: T, b: T, x: T) -> T {
    inc_beta_and_pdf(a, b, x, ln_beta(a, b)).0
}

/// `I_x(a, b)` together with the Beta(a, b) density at `x`, given `ln B(a, b)`.
fn inc_beta_and_pdf<T: Real>(a: T, b: T, x: T, ln_b: T) -> (T, T) {
    if x <= T::zero() {
        return (T::zero(), T::zero());
    }
    if x >= T::one() {
        return (T::one(), T::zero());
    }
    let front = (a * x.ln() + b * (-x).ln_1p() - ln_b).exp();
    let pdf = front / (x * (T::one() - x));
    let cdf = if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        T::one() - front * beta_cf(b, a, T::one() - x) / b
    };
    (cdf, pdf)
}

/// Density of the Beta(a, b) distribution.
pub fn beta_pdf<T: Real>(a: T, b: T, x: T) -> T {
    if x <= T::zero() || x >= T::one() {
        return T::zero();
    }
    ((a - T::one()) * x.ln() + (b - T::one()) * (-x).ln_1p() - ln_beta(a, b)).exp()
}

/// Quantile of the Beta(a, b) distribution: the `x` with `I_x(a, b) = p`.
pub fn inv_inc_beta<T: Real>(p: T, a: T, b: T) -> T {
    if p <= T::zero() {
        return T::zero();
    }
    if p >= T::one() {
        return T::one();
    }
    if p <= T::lit(0.5) {
        lower_tail_root(p, a, b)
    } else {
        // I_x(a, b) = p  <=>  I_{1-x}(b, a) = 1 - p
        T::one() - lower_tail_root(T::one() - p, b, a)
    }
}

/// Safeguarded Newton iteration on `I_x(a, b) - p` for `p <= 1/2`.
fn lower_tail_root<T: Real>(p: T, a: T, b: T) -> T {
    let eps = T::epsilon();
    let (mut lo, mut hi) = (T::zero(), T::one());
    let ln_b = ln_beta(a, b);
    let mut x = initial_guess(p, a, b);
    if !(x > T::zero() && x < T::one()) {
        x = T::lit(0.5);
    }
    for _ in 0..400 {
        let (cdf, pdf) = inc_beta_and_pdf(a, b, x, ln_b);
        let f = cdf - p;
        if f == T::zero() {
            return x;
        }
        if f < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = if pdf > T::zero() && pdf.is_finite() { x - f / pdf } else { T::nan() };
        if !(next > lo && next < hi) {
            next = if lo > T::zero() && hi / lo > T::lit(16.0) {
                (lo * hi).sqrt()
            } else {
                lo + (hi - lo) / T::lit(2.0)
            };
        }
        let step = (next - x).abs();
        x = next;
        if step <= T::lit(4.0) * eps * x || hi - lo <= T::lit(4.0) * eps * hi {
            break;
        }
    }
    x
}

/// Starting point for the quantile search (Abramowitz-Stegun 26.5.22 for
/// large shapes, a power-law tail approximation otherwise).
fn initial_guess<T: Real>(p: T, a: T, b: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    if a >= one && b >= one {
        let t = (-two * p.ln()).sqrt();
        let z = -((T::lit(2.30753) + t * T::lit(0.27061)) / (one + t * (T::lit(0.99229) + t * T::lit(0.04481))) - t);
        let al = (z * z - T::lit(3.0)) / T::lit(6.0);
        let h = two / (one / (two * a - one) + one / (two * b - one));
        let w = z * (al + h).sqrt() / h
            - (one / (two * b - one) - one / (two * a - one)) * (al + T::lit(5.0) / T::lit(6.0) - two / (T::lit(3.0) * h));
        a / (a + b * (two * w).exp())
    } else {
        let lna = (a / (a + b)).ln();
        let lnb = (b / (a + b)).ln();
        let t = (a * lna).exp() / a;
        let u = (b * lnb).exp() / b;
        let w = t + u;
        if p < t / w {
            (a * w * p).powf(one / a)
        } else {
            one - (b * w * (one - p)).powf(one / b)
        }
    }
}

/// Quantile of Student's t distribution with `dof` degrees of freedom.
pub fn student_t_quantile<T: Real>(p: T, dof: T) -> T {
    let half = T::lit(0.5);
    if p == half {
        return T::zero();
    }
    if p < half {
        return -student_t_quantile(T::one() - p, dof);
    }
    // P(|T| > t) = I_{dof/(dof+t²)}(dof/2, 1/2)
    let x = inv_inc_beta(T::lit(2.0) * (T::one() - p), dof * half, half);
    (dof * (T::one() - x) / x).sqrt()
}

/// CDF of Student's t distribution.
pub fn student_t_cdf<T: Real>(t: T, dof: T) -> T {
    let half = T::lit(0.5);
    let tail = half * inc_beta(dof * half, half, dof / (dof + t * t));
    if t >= T::zero() {
        T::one() - tail
    } else {
        tail
    }
}
