//! Square presentations of finite torsion modules over `R` and their secondary classes.

use rug::{Complex, Float};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flatmodel::{half_log_abs, FormElement, KContext, PointClass};
use crate::linalg::CMatrix;
use crate::numfield::{FieldElement, NumberField};

/// Determinant over `k` by Bareiss elimination; every division is exact in the field.
pub fn exact_det(field: &NumberField, matrix: &[Vec<FieldElement>]) -> Result<FieldElement> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("determinant of a non-square matrix".into()));
    }
    if n == 0 {
        return Ok(field.one());
    }
    let mut m = matrix.to_vec();
    let mut negate = false;
    let mut prev = field.one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return Ok(field.zero()),
            }
        }
        let prev_inv = field.inv(&prev)?;
        for i in k + 1..n {
            for j in k + 1..n {
                let t = field.mul(&m[k][k], &m[i][j]).sub(&field.mul(&m[i][k], &m[k][j]));
                m[i][j] = field.mul(&t, &prev_inv);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if negate { d.neg() } else { d })
}

/// `0 → R^m --M--> R^m → T → 0`.
#[derive(Clone, Debug)]
pub struct TorsionPresentation {
    entries: Vec<Vec<FieldElement>>,
    det_elem: FieldElement,
}

impl TorsionPresentation {
    pub fn new(field: &NumberField, entries: Vec<Vec<FieldElement>>) -> Result<Self> {
        let det_elem = exact_det(field, &entries)?;
        if field.norm(&det_elem) == 0 {
            return Err(Error::SingularPresentation);
        }
        Ok(TorsionPresentation { entries, det_elem })
    }

    pub fn diagonal(field: &NumberField, diag: &[FieldElement]) -> Result<Self> {
        let m = diag.len();
        let entries = (0..m)
            .map(|i| (0..m).map(|j| if i == j { diag[i].clone() } else { field.zero() }).collect())
            .collect();
        Self::new(field, entries)
    }

    pub fn identity(field: &NumberField, m: usize) -> Self {
        Self::diagonal(field, &vec![field.one(); m]).expect("identity is invertible")
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<FieldElement>] {
        &self.entries
    }

    pub fn det_elem(&self) -> &FieldElement {
        &self.det_elem
    }

    /// `M ⊕ M'`.
    pub fn block_sum(&self, field: &NumberField, other: &TorsionPresentation) -> Result<Self> {
        let (a, b) = (self.size(), other.size());
        let entries = (0..a + b)
            .map(|i| {
                (0..a + b)
                    .map(|j| match (i < a, j < a) {
                        (true, true) => self.entries[i][j].clone(),
                        (false, false) => other.entries[i - a][j - a].clone(),
                        _ => field.zero(),
                    })
                    .collect()
            })
            .collect();
        Self::new(field, entries)
    }

    /// `diag(left) · M · diag(right)`.
    pub fn twisted(&self, field: &NumberField, left: &[FieldElement], right: &[FieldElement]) -> Result<Self> {
        let m = self.size();
        if left.len() != m || right.len() != m {
            return Err(Error::Dimension(format!("unit diagonals must have length {m}")));
        }
        let entries = (0..m)
            .map(|i| (0..m).map(|j| field.mul(&field.mul(&left[i], &self.entries[i][j]), &right[j])).collect())
            .collect();
        Self::new(field, entries)
    }

    /// `σ(M)` as a complex matrix at the place representative `place`.
    pub fn embedded(&self, field: &NumberField, place: usize) -> CMatrix {
        let m = self.size();
        CMatrix::from_fn(m, m, field.precision(), |i, j| field.embed(&self.entries[i][j], place))
    }

    /// Accepts `{"size": m, "entries": [[[..]]]}`, a bare 3-level array, or a 2-level array of
    /// diagonal entries.
    pub fn from_json(field: &NumberField, v: &Value) -> Result<Self> {
        let (size, entries) = match v {
            Value::Object(o) => {
                let e = o.get("entries").ok_or_else(|| Error::Parse("missing 'entries'".into()))?;
                (o.get("size").and_then(Value::as_u64), e)
            }
            other => (None, other),
        };
        let rows = entries.as_array().ok_or_else(|| Error::Parse("entries must be an array".into()))?;
        let is_matrix = rows.first().and_then(Value::as_array).and_then(|r| r.first()).is_some_and(Value::is_array);
        let pres = if is_matrix {
            let mat = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                        .iter()
                        .map(|e| parse_element(field, e))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            if mat.iter().any(|r| r.len() != mat.len()) {
                return Err(Error::Dimension("presentation matrix must be square".into()));
            }
            Self::new(field, mat)?
        } else {
            let diag = rows.iter().map(|e| parse_element(field, e)).collect::<Result<Vec<_>>>()?;
            Self::diagonal(field, &diag)?
        };
        if let Some(s) = size {
            if s as usize != pres.size() {
                return Err(Error::Dimension(format!("declared size {s}, matrix has size {}", pres.size())));
            }
        }
        Ok(pres)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|r| Value::Array(r.iter().map(|e| json!(e.to_strings())).collect()))
            .collect();
        json!({ "size": self.size(), "entries": entries, "det": self.det_elem.to_strings() })
    }
}

fn parse_element(field: &NumberField, v: &Value) -> Result<FieldElement> {
    let coords = match v {
        Value::Array(a) => a.iter().map(json_rational_string).collect::<Result<Vec<_>>>()?,
        other => vec![json_rational_string(other)?],
    };
    field.parse_element(&coords)
}

fn json_rational_string(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

/// Unreduced torus form `-½ Σ ln|σ(det M)| b₁(σ)`.
pub fn zhat_form(field: &NumberField, pres: &TorsionPresentation) -> FormElement {
    half_log_abs(field, pres.det_elem()).neg()
}

/// The same form from floating determinants of the embedded matrices.
pub fn zhat_form_float(field: &NumberField, pres: &TorsionPresentation) -> Result<FormElement> {
    let bits = field.precision().bits();
    let coeffs = (0..field.num_places())
        .map(|p| {
            let d: Complex = pres.embedded(field, p).det()?;
            Ok(-(Float::with_val(bits, d.abs_ref()).ln() / 2u32))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FormElement::new(0, coeffs))
}

/// `Ẑ(T) = (0, 0, -½ Σ ln|σ(det M)| b₁(σ) mod lattice)`.
pub fn zhat(ctx: &KContext, field: &NumberField, pres: &TorsionPresentation) -> Result<PointClass> {
    ctx.a_map(&zhat_form(field, pres))
}

/// `Ẑ` is unchanged when `M` is twisted by unit diagonals on either side.
pub fn zhat_wellposed(
    ctx: &KContext,
    field: &NumberField,
    pres: &TorsionPresentation,
    left: &[FieldElement],
    right: &[FieldElement],
) -> Result<bool> {
    for u in left.iter().chain(right) {
        if !field.verify_unit(u) {
            return Err(Error::NotAUnit(format!("{:?}", u.to_strings())));
        }
    }
    let twisted = pres.twisted(field, left, right)?;
    Ok(ctx.class_eq(&zhat(ctx, field, pres)?, &zhat(ctx, field, &twisted)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatmodel::build_lattice;
    use crate::mp;
    use rug::Integer;

    fn zsqrt2() -> NumberField {
        NumberField::build(&[Integer::from(-2), Integer::new(), Integer::from(1)], 50).unwrap()
    }

    fn cofactor_det(m: &[Vec<i64>]) -> i64 {
        if m.len() == 1 {
            return m[0][0];
        }
        (0..m.len())
            .map(|c| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| *x).collect()).collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn exact_det_examples() {
        let k = zsqrt2();
        let id = TorsionPresentation::identity(&k, 3);
        assert_eq!(*id.det_elem(), k.one());
        let d = TorsionPresentation::diagonal(&k, &[k.element_from_ints(&[5, 1]), k.one()]).unwrap();
        assert_eq!(*d.det_elem(), k.element_from_ints(&[5, 1]));
        let ints = vec![vec![2, -1, 3], vec![0, 0, 1], vec![5, 2, -2]];
        let mat: Vec<Vec<FieldElement>> =
            ints.iter().map(|r| r.iter().map(|&x| k.from_int(x)).collect()).collect();
        assert_eq!(exact_det(&k, &mat).unwrap(), k.from_int(cofactor_det(&ints)));
    }

    #[test]
    fn singular_presentation_rejected() {
        let k = zsqrt2();
        let a = k.element_from_ints(&[0, 1]);
        let mat = vec![vec![a.clone(), k.from_int(2)], vec![k.one(), a]];
        assert!(matches!(TorsionPresentation::new(&k, mat), Err(Error::SingularPresentation)));
    }

    #[test]
    fn zhat_of_five_plus_a() {
        let k = zsqrt2();
        let p = k.precision();
        let ctx = KContext::new(build_lattice(&k, &[k.element_from_ints(&[1, 1])]).unwrap(), vec![]);
        let pres = TorsionPresentation::diagonal(&k, &[k.element_from_ints(&[5, 1])]).unwrap();
        let z = zhat(&ctx, &k, &pres).unwrap();
        assert!(!ctx.is_zero(&z));
        let bits = p.bits();
        let s2 = Float::with_val(bits, 2).sqrt();
        let expect = -((Float::with_val(bits, 5) + &s2) / (Float::with_val(bits, 5) - &s2)).ln() / 2u32;
        let q = zhat_form(&k, &pres).quotient_coords();
        assert!(mp::close(&q[0], &expect, &p.residual_tol()));
        assert!(mp::fmt_float(&q[0], 30).starts_with("-0.2907692890"));
        assert!(ctx.is_zero(&zhat(&ctx, &k, &TorsionPresentation::identity(&k, 2)).unwrap()));
    }

    #[test]
    fn unit_presentations_are_flat() {
        let k = zsqrt2();
        let u = k.element_from_ints(&[1, 1]);
        let ctx = KContext::new(build_lattice(&k, std::slice::from_ref(&u)).unwrap(), vec![]);
        let pres = TorsionPresentation::diagonal(&k, &[u.clone(), u.clone()]).unwrap();
        assert!(ctx.is_zero(&zhat(&ctx, &k, &pres).unwrap()));
        let base = TorsionPresentation::diagonal(&k, &[k.element_from_ints(&[5, 1]), k.from_int(3)]).unwrap();
        assert!(zhat_wellposed(&ctx, &k, &base, &[k.one(), k.one()], &[k.one(), k.one()]).unwrap());
        assert!(zhat_wellposed(&ctx, &k, &base, &[u.clone(), k.one()], &[k.one(), k.one()]).unwrap());
        assert!(zhat_wellposed(&ctx, &k, &base, &[k.one(), k.one()], &[k.from_int(-1), k.from_int(-1)]).unwrap());
        assert!(matches!(
            zhat_wellposed(&ctx, &k, &base, &[k.from_int(2), k.one()], &[k.one(), k.one()]),
            Err(Error::NotAUnit(_))
        ));
    }

    #[test]
    fn exact_and_float_determinants_agree() {
        let k = zsqrt2();
        let p = k.precision();
        let e = |a, b| k.element_from_ints(&[a, b]);
        let mat = vec![vec![e(3, 1), e(0, 2), e(1, 0)], vec![e(-1, 1), e(4, 0), e(2, -1)], vec![e(0, 0), e(1, 1), e(5, 2)]];
        let pres = TorsionPresentation::new(&k, mat).unwrap();
        let a = zhat_form(&k, &pres);
        let b = zhat_form_float(&k, &pres).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!(mp::close(x, y, &p.half_tol()));
        }
    }

    #[test]
    fn presentation_json_forms() {
        let k = zsqrt2();
        let full = serde_json::json!({"size": 1, "entries": [[["5/1", "1/1"]]]});
        let bare = serde_json::json!([[["5", "1"]]]);
        let diag = serde_json::json!([["5", "1"], ["1"]]);
        let target = k.element_from_ints(&[5, 1]);
        assert_eq!(*TorsionPresentation::from_json(&k, &full).unwrap().det_elem(), target);
        assert_eq!(*TorsionPresentation::from_json(&k, &bare).unwrap().det_elem(), target);
        let d = TorsionPresentation::from_json(&k, &diag).unwrap();
        assert_eq!((d.size(), d.det_elem().clone()), (2, target));
        let bad = serde_json::json!({"size": 2, "entries": [[["1"]]]});
        assert!(TorsionPresentation::from_json(&k, &bad).is_err());
    }
}
