#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use diffkr::linalg::CMatrix;
use diffkr::Precision;

pub type QMat = Vec<Vec<Rational>>;

pub fn qzeros(r: usize, c: usize) -> QMat {
    vec![vec![Rational::new(); c]; r]
}

pub fn qidentity(n: usize) -> QMat {
    let mut m = qzeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rational::from(1);
    }
    m
}

pub fn qmul(a: &QMat, b: &QMat, inner: usize, cols: usize) -> QMat {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| {
                    let mut acc = Rational::new();
                    for k in 0..inner {
                        acc += Rational::from(&row[k] * &b[k][c]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn qtranspose(a: &QMat, rows: usize, cols: usize) -> QMat {
    (0..cols).map(|c| (0..rows).map(|r| a[r][c].clone()).collect()).collect()
}

/// Determinant by Gaussian elimination over the rationals.
pub fn qdet(m: &QMat) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Rational::from(1);
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| a[r][col] != 0) else {
            return Rational::new();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let piv = a[col][col].clone();
        det *= &piv;
        for r in col + 1..n {
            if a[r][col] == 0 {
                continue;
            }
            let f = Rational::from(&a[r][col] / &piv);
            for c in col..n {
                let t = Rational::from(&f * &a[col][c]);
                a[r][c] -= t;
            }
        }
    }
    det
}

pub fn qinverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let mut a: QMat = m.iter().cloned().zip(qidentity(n)).map(|(mut l, r)| {
        l.extend(r);
        l
    }).collect();
    for col in 0..n {
        let p = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(p, col);
        let piv = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] /= &piv;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let t = Rational::from(&f * &a[col][c]);
                    a[r][c] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Indices of a maximal set of linearly independent columns.
pub fn pivot_columns(m: &QMat, rows: usize, cols: usize) -> Vec<usize> {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(p, r);
        let piv = a[r][c].clone();
        for i in r + 1..rows {
            if a[i][c] != 0 {
                let f = Rational::from(&a[i][c] / &piv);
                for k in c..cols {
                    let t = Rational::from(&f * &a[r][k]);
                    a[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// A cochain complex over Q with metrics: everything the contraction oracle needs.
#[derive(Clone, Debug)]
pub struct QComplex {
    pub dims: Vec<usize>,
    pub diffs: Vec<QMat>,
    /// Columns are cocycles representing the chosen cohomology basis.
    pub coh_maps: Vec<QMat>,
    pub coh_dims: Vec<usize>,
}

pub fn rand_int(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    rng.gen_range(lo..=hi)
}

pub fn rand_invertible(rng: &mut ChaCha8Rng, n: usize) -> QMat {
    loop {
        let m: QMat = (0..n).map(|_| (0..n).map(|_| Rational::from(rand_int(rng, -3, 3))).collect()).collect();
        if qdet(&m) != 0 {
            return m;
        }
    }
}

/// Symmetric positive definite `AᵀA + I` with small integer `A`.
pub fn rand_spd(rng: &mut ChaCha8Rng, n: usize) -> QMat {
    let a: QMat = (0..n).map(|_| (0..n).map(|_| Rational::from(rand_int(rng, -2, 2))).collect()).collect();
    let mut g = qmul(&qtranspose(&a, n, n), &a, n, n);
    for (i, row) in g.iter_mut().enumerate() {
        row[i] += 1;
    }
    g
}

/// Random exact complex with `groups` cochain groups of dimension ≤ `max_dim`.
/// Built from a split normal form conjugated by random invertible matrices.
pub fn rand_complex(rng: &mut ChaCha8Rng, groups: usize, max_dim: usize) -> QComplex {
    let dims: Vec<usize> = (0..groups).map(|_| rng.gen_range(1..=max_dim)).collect();
    let mut ranks = vec![0usize; groups.saturating_sub(1)];
    for i in 0..ranks.len() {
        let prev = if i == 0 { 0 } else { ranks[i - 1] };
        let room = dims[i].saturating_sub(prev).min(dims[i + 1]);
        ranks[i] = rng.gen_range(0..=room);
    }
    let rank_in = |i: usize| if i == 0 { 0 } else { ranks[i - 1] };
    let rank_out = |i: usize| if i < ranks.len() { ranks[i] } else { 0 };
    let coh_dims: Vec<usize> = (0..groups).map(|i| dims[i] - rank_in(i) - rank_out(i)).collect();
    let p: Vec<QMat> = dims.iter().map(|&n| rand_invertible(rng, n)).collect();
    let p_inv: Vec<QMat> = p.iter().map(|m| qinverse(m).unwrap()).collect();
    let mut diffs = Vec::new();
    for i in 0..groups.saturating_sub(1) {
        // lift slot t of C^i goes to image slot t of C^{i+1}
        let mut d = qzeros(dims[i + 1], dims[i]);
        let lift0 = rank_in(i) + coh_dims[i];
        for t in 0..ranks[i] {
            let mut s = 0;
            while s == 0 {
                s = rand_int(rng, -3, 3);
            }
            d[t][lift0 + t] = Rational::from(s);
        }
        let tmp = qmul(&p[i + 1], &d, dims[i + 1], dims[i]);
        diffs.push(qmul(&tmp, &p_inv[i], dims[i], dims[i]));
    }
    let mut coh_maps = Vec::new();
    for i in 0..groups {
        let h = coh_dims[i];
        let mut z = qzeros(dims[i], h);
        for c in 0..h {
            z[rank_in(i) + c][c] = Rational::from(1);
            for b in 0..rank_in(i) {
                z[b][c] = Rational::from(rand_int(rng, -2, 2));
            }
        }
        let mix = rand_invertible(rng, h);
        let z = qmul(&z, &mix, h, h);
        coh_maps.push(qmul(&p[i], &z, dims[i], h));
    }
    QComplex { dims, diffs, coh_maps, coh_dims }
}

/// `τ²` by the contraction chase: in degree `i` take the basis `[d(lifts) | cocycles | lifts]`,
/// with lifts the unit vectors at pivot columns of `d_i`. Then
/// `τ² = Π_i (det(TᵢᵀGᵢTᵢ) / det Hᵢ)^{(-1)^i}`.
pub fn milnor_tau_squared(c: &QComplex, grams: &[QMat], coh_grams: &[QMat]) -> Rational {
    let n = c.dims.len();
    let pivots: Vec<Vec<usize>> =
        (0..n - 1).map(|i| pivot_columns(&c.diffs[i], c.dims[i + 1], c.dims[i])).collect();
    let mut tau2 = Rational::from(1);
    for i in 0..n {
        let dim = c.dims[i];
        let mut cols: Vec<Vec<Rational>> = Vec::new();
        if i > 0 {
            for &p in &pivots[i - 1] {
                cols.push((0..dim).map(|r| c.diffs[i - 1][r][p].clone()).collect());
            }
        }
        for k in 0..c.coh_dims[i] {
            cols.push((0..dim).map(|r| c.coh_maps[i][r][k].clone()).collect());
        }
        if i + 1 < n {
            for &p in &pivots[i] {
                let mut e = vec![Rational::new(); dim];
                e[p] = Rational::from(1);
                cols.push(e);
            }
        }
        assert_eq!(cols.len(), dim, "contraction basis in degree {i} is not square");
        let t = qtranspose(&cols, cols.len(), dim);
        let gt = qmul(&grams[i], &t, dim, dim);
        let vol = qdet(&qmul(&qtranspose(&t, dim, dim), &gt, dim, dim));
        let h = if c.coh_dims[i] == 0 { Rational::from(1) } else { qdet(&coh_grams[i]) };
        let factor = vol / h;
        if i % 2 == 0 {
            tau2 *= factor;
        } else {
            tau2 /= factor;
        }
    }
    tau2
}

pub fn to_cmatrix(m: &QMat, rows: usize, cols: usize, prec: Precision) -> CMatrix {
    CMatrix::from_fn(rows, cols, prec, |r, c| prec.creal(&prec.rational(&m[r][c])))
}

/// Random Hermitian positive definite `AᴴA + I` with Gaussian-ish complex entries.
pub fn rand_hpd(rng: &mut ChaCha8Rng, n: usize, prec: Precision) -> CMatrix {
    let bits = prec.bits();
    let a = CMatrix::from_fn(n, n, prec, |_, _| {
        let re = Float::with_val(bits, rng.gen_range(-1.0f64..1.0));
        let im = Float::with_val(bits, rng.gen_range(-1.0f64..1.0));
        Complex::with_val(bits, (re, im))
    });
    a.adjoint().mul(&a).unwrap().add(&CMatrix::identity(n, prec)).unwrap()
}

/// ζ(s) from Borwein's acceleration of the alternating series.
pub fn zeta_borwein(s: u32, bits: u32) -> Float {
    let n: u32 = (bits as f64 / 2.54).ceil() as u32 + 10;
    let nn = Integer::from(n);
    let mut d = Vec::with_capacity(n as usize + 1);
    let mut acc = Rational::new();
    for i in 0..=n {
        let num = Integer::from(Integer::factorial(n + i - 1)) * Integer::from(Integer::u_pow_u(4, i));
        let den = Integer::from(Integer::factorial(n - i)) * Integer::from(Integer::factorial(2 * i));
        acc += Rational::from((num, den));
        let dk = Rational::from(&acc * &nn);
        assert!(*dk.denom() == 1);
        d.push(dk.numer().clone());
    }
    let dn = d[n as usize].clone();
    let mut sum = Float::new(bits);
    for k in 0..n as usize {
        let num = Float::with_val(bits, Integer::from(&d[k] - &dn));
        let den = Float::with_val(bits, Integer::from(k as u32 + 1).pow(s));
        let term = num / den;
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let eta = -sum / Float::with_val(bits, &dn);
    let factor = Float::with_val(bits, 1) - Float::with_val(bits, Float::i_exp(1, 1 - s as i32));
    eta / factor
}

/// `Σ_{k≥1} e^{ikθ}/kⁿ`: direct sum to `N`, then three summation-by-parts steps on the tail
/// using the closed form of `Σ z^k`.
pub fn polylog_series(n: u32, theta: &Float, big_n: u32, bits: u32) -> Complex {
    let z = Complex::with_val(bits, (Float::with_val(bits, theta.cos_ref()), Float::with_val(bits, theta.sin_ref())));
    let mut zk = Complex::with_val(bits, 1);
    let mut sum = Complex::new(bits);
    for k in 1..=big_n {
        zk *= &z;
        let kn = Float::with_val(bits, Float::with_val(bits, k).pow(n));
        sum += Complex::with_val(bits, &zk / &kn);
    }
    // tail T[f] = -c z^N f(N+1) + c T[Δf],  c = z/(z-1),  Δf(k) = f(k) - f(k+1)
    let c = Complex::with_val(bits, &z / Complex::with_val(bits, &z - 1u32));
    let f = |k: u32, order: u32| -> Float {
        // Δ^order of k^{-n}
        let mut acc = Float::new(bits);
        let mut binom = Integer::from(1);
        for m in 0..=order {
            let v = Float::with_val(bits, Float::with_val(bits, k + m).pow(n)).recip();
            let t = Float::with_val(bits, &v * &binom);
            if m % 2 == 0 {
                acc += t;
            } else {
                acc -= t;
            }
            binom = binom * (order - m) / (m + 1);
        }
        acc
    };
    let mut tail = Complex::new(bits);
    let mut cpow = Complex::with_val(bits, &c);
    for order in 0..3 {
        let term = Complex::with_val(bits, &cpow * &zk) * f(big_n + 1, order);
        tail -= term;
        cpow *= &c;
    }
    sum + tail
}

/// Bernoulli polynomials for `n ≤ 6` from the tabulated numbers.
pub fn bernoulli_poly_table(n: usize, x: &Float) -> Float {
    let b = [(1, 1), (-1, 2), (1, 6), (0, 1), (-1, 30), (0, 1), (1, 42)];
    let bits = x.prec();
    let mut acc = Float::new(bits);
    for k in 0..=n {
        let bk = Rational::from(b[k]);
        let binom = Integer::from(Integer::binomial_u(n as u32, k as u32));
        let coeff = Float::with_val(bits, Rational::from(&bk * &binom));
        acc += coeff * Float::with_val(bits, Pow::pow(x, (n - k) as u32));
    }
    acc
}
