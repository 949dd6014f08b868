//! Cyclotomic circle bundles: polylogarithmic torsion forms, `u_j`, the regulator identity,
//! the degree-0 Cheeger–Müller check, Borel dimensions, normalizations and Hatcher constants.

use std::fmt;
use std::str::FromStr;

use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::mp::{self, Precision};
use crate::numfield::{cyclotomic_poly, NumberField};
use crate::polylog::{bernoulli, polylog_circle, zeta_int};
use crate::rtorsion::MetrizedComplexAtPlace;

/// `Z[ξ]` for an odd prime `r`, with the embedded roots of unity at each place.
#[derive(Clone, Debug)]
pub struct CyclotomicSetup {
    r: u32,
    field: NumberField,
    thetas: Vec<Float>,
}

fn is_prime(r: u32) -> bool {
    r >= 2 && (2..).take_while(|d| d * d <= r).all(|d| !r.is_multiple_of(d))
}

impl CyclotomicSetup {
    pub fn new(r: u32, digits: u32) -> Result<Self> {
        if r < 3 || !is_prime(r) {
            return Err(Error::Invalid(format!("r must be an odd prime, got {r}")));
        }
        let field = NumberField::build(&cyclotomic_poly(r), digits)?;
        let prec = field.precision();
        let bits = prec.bits();
        let mut thetas = Vec::with_capacity(field.num_places());
        for pl in 0..field.num_places() {
            let z = field.place_root(pl);
            let modulus = Float::with_val(bits, z.abs_ref());
            if !mp::close(&modulus, &prec.one(), &prec.residual_tol()) {
                return Err(Error::NoConvergence(format!("|σ(ξ)| = {} at place {pl}", mp::fmt_float(&modulus, 12))));
            }
            thetas.push(Float::with_val(bits, z.arg_ref()));
        }
        if field.r_real() != 0 || field.r_complex() as u32 != (r - 1) / 2 {
            return Err(Error::NoConvergence("unexpected signature for a cyclotomic field".into()));
        }
        Ok(CyclotomicSetup { r, field, thetas })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn precision(&self) -> Precision {
        self.field.precision()
    }

    /// `θ_σ ∈ (0, π)` with `σ(ξ) = e^{iθ_σ}`.
    pub fn thetas(&self) -> &[Float] {
        &self.thetas
    }

    pub fn xi_at_place(&self, place: usize) -> &Complex {
        self.field.place_root(place)
    }
}

/// `(2j+1)! / ((2π)^j 2^{2j} (j!)²)`.
pub fn prefactor(j: u32, prec: Precision) -> Float {
    let bits = prec.bits();
    let num = mp::factorial(2 * j + 1);
    let fj = mp::factorial(j);
    let den = Integer::from(fj.square_ref()) << (2 * j);
    let q = Rational::from((num, den));
    let two_pi_j = Float::with_val(bits, rug::ops::Pow::pow(prec.two_pi(), j));
    prec.rational(&q) / two_pi_j
}

fn parity_sign(j: u32) -> i32 {
    // (-1)^{j/2} for even j, (-1)^{(j-1)/2} for odd j
    if (j / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `T_j(θ)`: `(−1)^{j/2}·pref·Re Li_{j+1}(e^{iθ})` for even `j`,
/// `(−1)^{(j−1)/2}·pref·Im Li_{j+1}(e^{iθ})` for odd `j`.
pub fn torsion_form_at(theta: &Float, j: u32, prec: Precision) -> Result<Float> {
    let li = polylog_circle(j + 1, theta, prec)?;
    let part = if j.is_multiple_of(2) { Float::with_val(prec.bits(), li.real()) } else { Float::with_val(prec.bits(), li.imag()) };
    Ok(part * prefactor(j, prec) * parity_sign(j))
}

/// `T_{σ,j}` for every place and `0 ≤ j ≤ jmax`, indexed `[σ][j]`.
pub fn torsion_form_coeffs(setup: &CyclotomicSetup, jmax: u32) -> Result<Vec<Vec<Float>>> {
    let prec = setup.precision();
    setup.thetas.iter().map(|t| (0..=jmax).map(|j| torsion_form_at(t, j, prec)).collect()).collect()
}

/// Trivial-holonomy coefficient: `(−1)^{j/2}·pref·ζ(j+1)` for even `j ≥ 2`, zero for odd `j`.
pub fn trivial_holonomy_coeff(j: u32, prec: Precision) -> Result<Float> {
    if j == 0 {
        return Err(Error::TrivialHolonomyAtJZero);
    }
    if j % 2 == 1 {
        return Ok(prec.zero());
    }
    Ok(zeta_int(j + 1, prec)? * prefactor(j, prec) * parity_sign(j))
}

/// `u_j(σ)`: `pref·Im Li_{j+1}(σξ)` for odd `j`, `pref·(Re Li_{j+1}(σξ) − ζ(j+1))` for even `j`.
pub fn u_coeff(setup: &CyclotomicSetup, j: u32) -> Result<Vec<Float>> {
    if j == 0 {
        return Err(Error::Invalid("u_j is defined for j >= 1".into()));
    }
    let prec = setup.precision();
    let bits = prec.bits();
    let pref = prefactor(j, prec);
    setup
        .thetas
        .iter()
        .map(|t| {
            let li = polylog_circle(j + 1, t, prec)?;
            let v = if j % 2 == 1 {
                Float::with_val(bits, li.imag())
            } else {
                Float::with_val(bits, li.real()) - zeta_int(j + 1, prec)?
            };
            Ok(v * &pref)
        })
        .collect()
}

/// One place of the regulator identity.
#[derive(Clone, Debug)]
pub struct RegulatorRow {
    pub lhs: Float,
    pub rhs: Float,
    /// `lhs / rhs` with `u_j` as printed.
    pub ratio: Float,
    /// `lhs / rhs` with `u_j` carrying the torsion-form sign `(−1)^{⌊j/2⌋}`.
    pub ratio_display: Float,
}

/// `lhs = (2πi)^{-j}·(−1)^j·((2j+1)!/j!)·proj_{R(j)}(Li_{j+1}(σξ) − ζ(j+1))`,
/// `rhs = (−1)^j·j!·2^{2j}·u_j(σ)`.
pub fn regulator_identity_check(setup: &CyclotomicSetup, j: u32) -> Result<Vec<RegulatorRow>> {
    if j == 0 {
        return Err(Error::Invalid("the regulator identity needs j >= 1".into()));
    }
    let prec = setup.precision();
    let bits = prec.bits();
    let us = u_coeff(setup, j)?;
    let zeta = zeta_int(j + 1, prec)?;
    let coeff = prec.rational(&Rational::from((mp::factorial(2 * j + 1), mp::factorial(j))));
    let sign_j = if j.is_multiple_of(2) { 1 } else { -1 };
    let two_pi_j = Float::with_val(bits, rug::ops::Pow::pow(prec.two_pi(), j));
    let mut rows = Vec::with_capacity(us.len());
    for (t, u) in setup.thetas.iter().zip(us) {
        let li = polylog_circle(j + 1, t, prec)?;
        let shifted = Complex::with_val(bits, &li - &zeta);
        // projection onto R(j) = (2πi)^j R, written as (2πi)^j · x with x real
        let x = if j.is_multiple_of(2) {
            // Re(w) / (i^j (2π)^j) with i^j = (−1)^{j/2}
            let re = Float::with_val(bits, shifted.real());
            if (j / 2).is_multiple_of(2) {
                re
            } else {
                -re
            }
        } else {
            // i·Im(w) / (i^j (2π)^j) = Im(w)·i^{1−j}/(2π)^j
            let im = Float::with_val(bits, shifted.imag());
            if ((j - 1) / 2).is_multiple_of(2) {
                im
            } else {
                -im
            }
        };
        let lhs = x / &two_pi_j * &coeff * sign_j;
        let scale = prec.integer(&(mp::factorial(j) << (2 * j))) * sign_j;
        let rhs = Float::with_val(bits, &u * &scale);
        let ratio = Float::with_val(bits, &lhs / &rhs);
        let ratio_display = Float::with_val(bits, &ratio * parity_sign(j));
        rows.push(RegulatorRow { lhs, rhs, ratio, ratio_display });
    }
    Ok(rows)
}

/// One place of the Cheeger–Müller comparison.
#[derive(Clone, Debug)]
pub struct CheegerMullerRow {
    pub t0_abs: Float,
    pub log_tau: Float,
    pub residual: Float,
}

/// Compares `|T_{σ,0}|` with `|ln τ_σ|` for `0 → C --(1−σξ)--> C → 0`.
pub fn cheeger_muller_check(setup: &CyclotomicSetup) -> Result<Vec<CheegerMullerRow>> {
    let prec = setup.precision();
    let bits = prec.bits();
    let field = setup.field();
    let d = field.one().sub(&field.generator());
    (0..field.num_places())
        .map(|pl| {
            let t0 = torsion_form_at(&setup.thetas[pl], 0, prec)?.abs();
            let m = CMatrix::from_fn(1, 1, prec, |_, _| field.embed(&d, pl));
            let cplx = MetrizedComplexAtPlace::acyclic_standard(vec![1, 1], vec![m], prec)?;
            let log_tau = cplx.log_reidemeister()?;
            let residual = Float::with_val(bits, &t0 - Float::with_val(bits, log_tau.abs_ref())).abs();
            Ok(CheegerMullerRow { t0_abs: t0, log_tau, residual })
        })
        .collect()
}

/// `dim A^{-i}` for `0 ≤ i ≤ imax`.
pub fn borel_dims(r_real: usize, r_complex: usize, imax: usize) -> Vec<usize> {
    (0..=imax)
        .map(|i| match i {
            0 => 1,
            1 => r_real + r_complex - 1,
            _ => match i % 4 {
                2 | 0 => 0,
                3 => r_complex,
                _ => r_real + r_complex,
            },
        })
        .collect()
}

pub fn borel_dims_field(field: &NumberField, imax: usize) -> Vec<usize> {
    borel_dims(field.r_real(), field.r_complex(), imax)
}

/// `dim X_{2j−1}(R)`: each complex place contributes one line, each real place contributes
/// one exactly when `R(j−1)` is the conjugation-fixed line, i.e. for odd `j`.
pub fn x_space_dim(r_real: usize, r_complex: usize, j: u32) -> usize {
    r_complex + if j % 2 == 1 { r_real } else { 0 }
}

/// Normalizations of Kamber–Tondeur forms relative to Bismut–Lott.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    BismutLott,
    Chern,
    Igusa,
    Borel,
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "bl" | "bismutlott" => Ok(Normalization::BismutLott),
            "chern" => Ok(Normalization::Chern),
            "igusa" => Ok(Normalization::Igusa),
            "borel" => Ok(Normalization::Borel),
            _ => Err(Error::Invalid(format!("unknown normalization '{s}'"))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::BismutLott => "bl",
            Normalization::Chern => "chern",
            Normalization::Igusa => "igusa",
            Normalization::Borel => "borel",
        })
    }
}

/// `N_Chern`, `N_Igusa` and `N_Borel = |N_Borel|·i^{borel_ipow}` in degree `2j+1`.
#[derive(Clone, Debug)]
pub struct NormFactors {
    pub j: u32,
    pub chern: Float,
    pub igusa: Float,
    pub borel_magnitude: Float,
    pub borel_ipow: u32,
}

impl NormFactors {
    /// The factor as a complex number.
    pub fn factor(&self, n: Normalization, prec: Precision) -> Complex {
        match n {
            Normalization::BismutLott => prec.creal(&prec.one()),
            Normalization::Chern => prec.creal(&self.chern),
            Normalization::Igusa => prec.creal(&self.igusa),
            Normalization::Borel => {
                let m = &self.borel_magnitude;
                let z = prec.zero();
                match self.borel_ipow {
                    0 => prec.complex(m, &z),
                    1 => prec.complex(&z, m),
                    2 => prec.complex(&Float::with_val(prec.bits(), -m), &z),
                    _ => prec.complex(&z, &Float::with_val(prec.bits(), -m)),
                }
            }
        }
    }
}

pub fn normalization_factors(j: u32, prec: Precision) -> NormFactors {
    let bits = prec.bits();
    let f2 = prec.integer(&mp::factorial(2 * j + 1));
    let fj = prec.integer(&mp::factorial(j));
    let two_pi_j = Float::with_val(bits, rug::ops::Pow::pow(prec.two_pi(), j));
    let four_j = prec.integer(&(Integer::from(1) << (2 * j)));
    // (−1)^j 2π (2j+1)! / (2^{2j+1} j!)
    let mut chern = prec.two_pi() * &f2 / (Float::with_val(bits, &four_j * 2u32) * &fj);
    if j % 2 == 1 {
        chern = -chern;
    }
    let igusa = Float::with_val(bits, &f2 / &two_pi_j) / &four_j;
    let borel_magnitude = f2 / two_pi_j / fj;
    NormFactors { j, chern, igusa, borel_magnitude, borel_ipow: j % 4 }
}

/// `v_to = v_from · N_from / N_to`, where `v_BL = N_X · v_X`.
pub fn convert(value: &Complex, j: u32, from: Normalization, to: Normalization, prec: Precision) -> Complex {
    let n = normalization_factors(j, prec);
    let bits = prec.bits();
    Complex::with_val(bits, value * n.factor(from, prec)) / n.factor(to, prec)
}

#[derive(Clone, Debug)]
pub struct HatcherConstant {
    pub k: u32,
    pub a: Integer,
    pub kappa: Rational,
    pub value: Float,
}

/// `a_k = denom(B_{2k}/(4k))`, `κ_k = 1` (odd `k`) or `1/2` (even `k`), value `a_k κ_k ζ(2k+1)`.
pub fn hatcher_constant(k: u32, prec: Precision) -> Result<HatcherConstant> {
    if k == 0 {
        return Err(Error::Invalid("hatcher constant needs k >= 1".into()));
    }
    let q = bernoulli(2 * k as usize) / Integer::from(4 * k);
    let a = q.denom().clone();
    let kappa = if k % 2 == 1 { Rational::from(1) } else { Rational::from((1, 2)) };
    let value = zeta_int(2 * k + 1, prec)? * prec.rational(&Rational::from(&kappa * &a));
    Ok(HatcherConstant { k, a, kappa, value })
}
