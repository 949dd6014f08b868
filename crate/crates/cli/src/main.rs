mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rug::{Float, Integer};
use serde_json::{json, Value};

use diffkr::circlebundle::{
    borel_dims, cheeger_muller_check, convert, hatcher_constant, normalization_factors, regulator_identity_check,
    torsion_form_coeffs, trivial_holonomy_coeff, u_coeff, x_space_dim, CyclotomicSetup, Normalization,
};
use diffkr::flatmodel::{build_lattice, parse_sigma_values, reduce_mod_lattice, sigma_map, unit_log};
use diffkr::linalg::CMatrix;
use diffkr::modtors::{zhat, zhat_form, zhat_wellposed, TorsionPresentation};
use diffkr::numfield::{FieldData, PlaceKind};
use diffkr::polylog::{beta_integral_check, bernoulli, polylog_circle, zeta_int};
use diffkr::rtorsion::{euler_identity_report, parse_cmatrix, rtorsion_form, MetrizedComplexAtPlace, MetrizedComplexOverR};
use diffkr::{mp, Error, FieldDescriptor, FormElement, KContext, PointClass, Precision, Result};

const DEFAULT_DIGITS: u32 = 50;

#[derive(Parser)]
#[command(name = "diffkr", version, about = "Point-level differential algebraic K-theory of number rings")]
struct Cli {
    /// Field descriptor (JSON).
    #[arg(long, global = true)]
    field: Option<PathBuf>,
    /// Working precision in decimal digits.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(30..=1000))]
    digits: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// JSON arguments are given inline or as `@path`.
#[derive(Subcommand)]
enum Cmd {
    /// Degree, signature, places and declared units of a field.
    FieldInfo {
        /// Defining polynomial `[c0, ..., 1]`, instead of --field.
        #[arg(long)]
        poly: Option<String>,
    },
    /// Half-log-absolute-value image of a unit.
    UnitLog {
        /// Power-basis coefficients, e.g. `["1","1"]`.
        #[arg(long)]
        elem: String,
    },
    /// Regulator lattice spanned by the descriptor's units.
    Lattice,
    /// Reduce a degree-one form modulo the regulator lattice.
    Reduce {
        /// Per-place coefficients: `{"sigma_0": ".."}` or an array.
        #[arg(long)]
        form: String,
    },
    /// Class of a free module with per-place Gram matrices.
    Cycl {
        /// One Hermitian matrix per place.
        #[arg(long)]
        grams: String,
    },
    /// Scale a class by per-place positive reals.
    Scale {
        /// `{"rank": .., "cls": [..], "torus": {..}}`; defaults to the unit class.
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        lambdas: String,
    },
    /// Secondary class of a torsion module from a square presentation.
    Zhat {
        #[arg(long)]
        pres: String,
        /// Diagonal of unit entries multiplied on the left (checks independence of the presentation).
        #[arg(long)]
        left: Option<String>,
        #[arg(long)]
        right: Option<String>,
    },
    /// Reidemeister torsion of a metrized complex (per place, or over the order with --field).
    Rtorsion {
        #[arg(long)]
        complex: String,
    },
    /// Residual of the Euler-characteristic identity for a complex over the order.
    EulerCheck {
        #[arg(long)]
        complex: String,
    },
    /// Li_n(e^{iθ}).
    Polylog {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        /// θ = 2πk/r.
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        r: Option<u32>,
    },
    /// Riemann zeta at an integer s ≥ 2
    Zeta {
        #[arg(long)]
        s: u32,
    },
    /// Bernoulli number B_m as an exact rational
    Bernoulli {
        #[arg(long)]
        m: usize,
    },
    /// Quadrature of ∫₀¹ (x² − x)^{j−1} dx against its closed form.
    BetaCheck {
        #[arg(long)]
        j: u32,
    },
    /// Torsion-form coefficients of the cyclotomic circle bundle.
    CircleTorsion {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 4)]
        jmax: u32,
        /// Trivial-holonomy coefficients instead (even j ≥ 2).
        #[arg(long)]
        trivial: bool,
    },
    /// Coefficients u_j of the circle-bundle torsion form at each complex place
    UCoeff {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        j: u32,
    },
    /// Compare the torsion form against the Borel regulator at each place
    RegulatorCheck {
        #[arg(long)]
        r: u32,
        /// Single j; all of 1..=4 when omitted.
        #[arg(long)]
        j: Option<u32>,
    },
    /// Degree-zero torsion of the circle bundle against −ln|1 − ζ|
    CheegerMuller {
        #[arg(long)]
        r: u32,
    },
    /// Dimensions of the rational K-groups, from --field or the signature.
    BorelDims {
        #[arg(long)]
        r_real: Option<usize>,
        #[arg(long)]
        r_complex: Option<usize>,
        #[arg(long, default_value_t = 13)]
        imax: usize,
    },
    /// Normalization factors, or conversion of a value between normalizations.
    Normalize {
        #[arg(long)]
        j: u32,
        /// `re` or `[re, im]`.
        #[arg(long, allow_hyphen_values = true)]
        value: Option<String>,
        #[arg(long, default_value = "bl")]
        from: String,
        #[arg(long, default_value = "bl")]
        to: String,
    },
    /// Hatcher constant for the image of J in degree 4k − 1
    Hatcher {
        #[arg(long)]
        k: u32,
    },
}

fn json_arg(s: &str) -> Result<Value> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => s.to_string(),
    };
    Ok(serde_json::from_str(&text)?)
}

fn strings(v: &Value) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected an array, got {v}")))?
        .iter()
        .map(|x| match x {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => Err(Error::Parse(format!("expected a rational, got {other}"))),
        })
        .collect()
}

struct Env {
    field_path: Option<PathBuf>,
    digits: Option<u32>,
}

impl Env {
    fn precision(&self) -> Precision {
        Precision::new(self.digits.unwrap_or(DEFAULT_DIGITS))
    }

    fn field(&self) -> Result<FieldData> {
        let path = self.field_path.as_ref().ok_or_else(|| Error::Invalid("this command needs --field".into()))?;
        FieldDescriptor::load(path)?.build(self.digits)
    }

    fn context(&self) -> Result<(FieldData, KContext)> {
        let fd = self.field()?;
        let lattice = build_lattice(&fd.field, &fd.units)?;
        let ctx = KContext::new(lattice, fd.class_orders.clone());
        Ok((fd, ctx))
    }
}

fn fmt(x: &Float, prec: Precision) -> String {
    mp::fmt_float(x, prec.digits())
}

fn class_json(c: &PointClass, prec: Precision) -> Value {
    c.to_json(prec.digits(), prec)
}

fn field_info(env: &Env, poly: Option<String>) -> Result<Value> {
    let fd = match poly {
        Some(p) => {
            let coeffs = json_arg(&p)?;
            let desc = FieldDescriptor { poly: serde_json::from_value(coeffs)?, digits: None, units: vec![], class_group: None };
            desc.build(Some(env.digits.unwrap_or(DEFAULT_DIGITS)))?
        }
        None => env.field()?,
    };
    let f = &fd.field;
    let prec = f.precision();
    let places: Vec<Value> = f
        .places()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let z = f.place_root(i);
            json!({
                "sigma": format!("sigma_{i}"),
                "kind": if p.kind == PlaceKind::Real { "real" } else { "complex" },
                "re": fmt(z.real(), prec),
                "im": fmt(z.imag(), prec),
            })
        })
        .collect();
    let units: Vec<Value> = fd
        .units
        .iter()
        .map(|u| json!({"coeffs": u.to_strings(), "norm": mp::fmt_rational(&f.norm(u)), "is_unit": f.verify_unit(u)}))
        .collect();
    Ok(json!({
        "poly": f.defining_poly().iter().map(Integer::to_string).collect::<Vec<_>>(),
        "degree": f.degree(),
        "digits": f.digits(),
        "r_real": f.r_real(),
        "r_complex": f.r_complex(),
        "dirichlet_rank": f.dirichlet_rank(),
        "places": places,
        "units": units,
        "class_group": fd.class_orders,
    }))
}

fn parse_class(ctx: &KContext, v: &Value, places: usize) -> Result<PointClass> {
    let prec = ctx.precision();
    let rank = match v.get("rank") {
        Some(Value::Number(n)) => Integer::from(n.as_i64().ok_or_else(|| Error::Parse("rank must be an integer".into()))?),
        Some(Value::String(s)) => Integer::parse(s).map(Integer::from).map_err(|e| Error::Parse(format!("rank: {e}")))?,
        None => Integer::new(),
        Some(other) => return Err(Error::Parse(format!("bad rank {other}"))),
    };
    let cls: Vec<i64> = match v.get("cls") {
        Some(Value::Array(a)) => a.iter().map(|x| x.as_i64().ok_or_else(|| Error::Parse("cls entries are integers".into()))).collect::<Result<_>>()?,
        None => vec![],
        Some(other) => return Err(Error::Parse(format!("bad cls {other}"))),
    };
    let torus = match v.get("torus") {
        Some(t) => FormElement::new(0, parse_sigma_values(t, places, prec)?),
        None => FormElement::zero(0, places, prec),
    };
    ctx.make(rank, &cls, &torus)
}

fn cyclotomic(env: &Env, r: u32) -> Result<CyclotomicSetup> {
    CyclotomicSetup::new(r, env.digits.unwrap_or(DEFAULT_DIGITS))
}

fn run(cli: Cli) -> Result<Value> {
    let env = Env { field_path: cli.field, digits: cli.digits };
    match cli.cmd {
        Cmd::FieldInfo { poly } => field_info(&env, poly),
        Cmd::UnitLog { elem } => {
            let fd = env.field()?;
            let f = &fd.field;
            let prec = f.precision();
            let u = f.parse_element(&strings(&json_arg(&elem)?)?)?;
            let form = unit_log(f, &u)?;
            let q: Vec<String> = form.quotient_coords().iter().map(|x| fmt(x, prec)).collect();
            Ok(json!({
                "unit": u.to_strings(),
                "norm": mp::fmt_rational(&f.norm(&u)),
                "form": form.projected(prec).to_json(prec.digits()),
                "quotient_coords": q,
            }))
        }
        Cmd::Lattice => {
            let (fd, ctx) = env.context()?;
            let mut v = ctx.lattice.to_json(fd.field.digits());
            v["units"] = json!(fd.units.iter().map(|u| u.to_strings()).collect::<Vec<_>>());
            Ok(v)
        }
        Cmd::Reduce { form } => {
            let (fd, ctx) = env.context()?;
            let prec = fd.field.precision();
            let f = FormElement::from_json(&json_arg(&form)?, fd.field.num_places(), prec)?;
            let (t, zero) = reduce_mod_lattice(&ctx.lattice, &f)?;
            Ok(json!({
                "torus": sigma_map(t.rep(prec).coeffs(), prec.digits()),
                "coords": t.coords().iter().map(|x| fmt(x, prec)).collect::<Vec<_>>(),
                "is_zero": zero,
            }))
        }
        Cmd::Cycl { grams } => {
            let (fd, ctx) = env.context()?;
            let prec = fd.field.precision();
            let v = json_arg(&grams)?;
            let mats = per_place_matrices(&v, fd.field.num_places(), prec)?;
            Ok(class_json(&ctx.cycl_free(&mats)?, prec))
        }
        Cmd::Scale { class, lambdas } => {
            let (fd, ctx) = env.context()?;
            let prec = fd.field.precision();
            let places = fd.field.num_places();
            let x = match class {
                Some(c) => parse_class(&ctx, &json_arg(&c)?, places)?,
                None => ctx.one(),
            };
            let lams = parse_sigma_values(&json_arg(&lambdas)?, places, prec)?;
            if lams.iter().any(|l| *l <= 0) {
                return Err(Error::Invalid("scaling factors must be positive".into()));
            }
            Ok(class_json(&ctx.scale_class(&x, &lams)?, prec))
        }
        Cmd::Zhat { pres, left, right } => {
            let (fd, ctx) = env.context()?;
            let f = &fd.field;
            let prec = f.precision();
            let p = TorsionPresentation::from_json(f, &json_arg(&pres)?)?;
            let class = zhat(&ctx, f, &p)?;
            let (_, member) = reduce_mod_lattice(&ctx.lattice, &zhat_form(f, &p))?;
            let mut out = json!({
                "det": p.det_elem().to_strings(),
                "norm": mp::fmt_rational(&f.norm(p.det_elem())),
                "form": zhat_form(f, &p).to_json(prec.digits()),
                "torus": sigma_map(class.torus.rep(prec).coeffs(), prec.digits()),
                "class": class_json(&class, prec),
                "in_lattice": member,
            });
            if left.is_some() || right.is_some() {
                let diag = |s: Option<String>| -> Result<Vec<diffkr::FieldElement>> {
                    match s {
                        None => Ok(vec![f.one(); p.size()]),
                        Some(s) => {
                            let v = json_arg(&s)?;
                            let a = v.as_array().ok_or_else(|| Error::Parse("unit diagonal must be an array".into()))?;
                            a.iter().map(|e| f.parse_element(&strings(e)?)).collect()
                        }
                    }
                };
                out["wellposed"] = json!(zhat_wellposed(&ctx, f, &p, &diag(left)?, &diag(right)?)?);
            }
            Ok(out)
        }
        Cmd::Rtorsion { complex } => {
            let v = json_arg(&complex)?;
            let (places, prec) = match &env.field_path {
                Some(_) => {
                    let fd = env.field()?;
                    let c = MetrizedComplexOverR::from_json(&fd.field, &v)?;
                    (c.places(&fd.field)?, fd.field.precision())
                }
                None => {
                    let prec = env.precision();
                    let list = match &v {
                        Value::Array(a) => a.clone(),
                        other => vec![other.clone()],
                    };
                    (list.iter().map(|c| MetrizedComplexAtPlace::from_json(c, prec)).collect::<Result<Vec<_>>>()?, prec)
                }
            };
            let mut rows = Vec::new();
            for (i, c) in places.iter().enumerate() {
                let ln_tau = c.log_reidemeister()?;
                let dims: Vec<usize> = c.cohomology()?.iter().map(|h| h.dim).collect();
                rows.push(json!({
                    "sigma": format!("sigma_{i}"),
                    "tau": fmt(&Float::with_val(prec.bits(), ln_tau.exp_ref()), prec),
                    "ln_tau": fmt(&ln_tau, prec),
                    "cohomology_dims": dims,
                }));
            }
            Ok(json!({"rows": rows, "form": rtorsion_form(&places)?.to_json(prec.digits())}))
        }
        Cmd::EulerCheck { complex } => {
            let (fd, ctx) = env.context()?;
            let prec = fd.field.precision();
            let c = MetrizedComplexOverR::from_json(&fd.field, &json_arg(&complex)?)?;
            let r = euler_identity_report(&ctx, &fd.field, &c)?;
            Ok(json!({
                "residual": class_json(&r.residual, prec),
                "residual_is_zero": r.residual_is_zero,
                "residual_half": class_json(&r.residual_half, prec),
                "residual_half_is_zero": r.residual_half_is_zero,
                "log_tau": r.log_tau.to_json(prec.digits()),
            }))
        }
        Cmd::Polylog { n, theta, k, r } => {
            let prec = env.precision();
            let th = match (theta, k, r) {
                (Some(t), None, None) => mp::parse_float(&t, prec)?,
                (None, Some(k), Some(r)) if r > 0 => prec.two_pi() * k / r,
                _ => return Err(Error::Invalid("give either --theta or both --k and --r".into())),
            };
            if n == 0 {
                return Err(Error::Invalid("n must be at least 1".into()));
            }
            let z = polylog_circle(n, &th, prec)?;
            Ok(json!({"n": n, "theta": fmt(&th, prec), "re": fmt(z.real(), prec), "im": fmt(z.imag(), prec)}))
        }
        Cmd::Zeta { s } => {
            if s < 2 {
                return Err(Error::Invalid("zeta needs s >= 2".into()));
            }
            let prec = env.precision();
            Ok(json!({"s": s, "value": fmt(&zeta_int(s, prec)?, prec)}))
        }
        Cmd::Bernoulli { m } => Ok(json!({"m": m, "value": mp::fmt_rational(&bernoulli(m))})),
        Cmd::BetaCheck { j } => {
            let prec = env.precision();
            let b = beta_integral_check(j, prec)?;
            Ok(json!({
                "j": j,
                "numeric": fmt(&b.numeric, prec),
                "exact": mp::fmt_rational(&b.exact),
                "error": mp::fmt_float(&b.error, 6),
            }))
        }
        Cmd::CircleTorsion { r, jmax, trivial } => {
            let setup = cyclotomic(&env, r)?;
            let prec = setup.precision();
            let mut rows = Vec::new();
            if trivial {
                for j in (2..=jmax).step_by(2) {
                    rows.push(json!({"j": j, "T": fmt(&trivial_holonomy_coeff(j, prec)?, prec)}));
                }
            } else {
                let t = torsion_form_coeffs(&setup, jmax)?;
                for (s, per_j) in t.iter().enumerate() {
                    for (j, v) in per_j.iter().enumerate() {
                        rows.push(json!({"sigma": format!("sigma_{s}"), "j": j, "T": fmt(v, prec)}));
                    }
                }
            }
            Ok(json!({"r": r, "rows": rows}))
        }
        Cmd::UCoeff { r, j } => {
            let setup = cyclotomic(&env, r)?;
            let prec = setup.precision();
            let rows: Vec<Value> = u_coeff(&setup, j)?
                .iter()
                .enumerate()
                .map(|(s, u)| json!({"sigma": format!("sigma_{s}"), "theta": fmt(&setup.thetas()[s], prec), "u": fmt(u, prec)}))
                .collect();
            Ok(json!({"r": r, "j": j, "rows": rows}))
        }
        Cmd::RegulatorCheck { r, j } => {
            let setup = cyclotomic(&env, r)?;
            let prec = setup.precision();
            let js: Vec<u32> = match j {
                Some(j) => vec![j],
                None => (1..=4).collect(),
            };
            let mut rows = Vec::new();
            for j in js {
                for (s, row) in regulator_identity_check(&setup, j)?.iter().enumerate() {
                    rows.push(json!({
                        "sigma": format!("sigma_{s}"),
                        "j": j,
                        "lhs": fmt(&row.lhs, prec),
                        "rhs": fmt(&row.rhs, prec),
                        "ratio": fmt(&row.ratio, prec),
                        "ratio_display": fmt(&row.ratio_display, prec),
                    }));
                }
            }
            Ok(json!({"r": r, "rows": rows}))
        }
        Cmd::CheegerMuller { r } => {
            let setup = cyclotomic(&env, r)?;
            let prec = setup.precision();
            let rows: Vec<Value> = cheeger_muller_check(&setup)?
                .iter()
                .enumerate()
                .map(|(s, row)| {
                    json!({
                        "sigma": format!("sigma_{s}"),
                        "theta": fmt(&setup.thetas()[s], prec),
                        "T0_abs": fmt(&row.t0_abs, prec),
                        "ln_tau": fmt(&row.log_tau, prec),
                        "residual": mp::fmt_float(&row.residual, 6),
                    })
                })
                .collect();
            Ok(json!({"r": r, "rows": rows}))
        }
        Cmd::BorelDims { r_real, r_complex, imax } => {
            let (rr, rc) = match (r_real, r_complex) {
                (Some(a), Some(b)) => (a, b),
                (None, None) => {
                    let fd = env.field()?;
                    (fd.field.r_real(), fd.field.r_complex())
                }
                _ => return Err(Error::Invalid("give both --r-real and --r-complex, or --field".into())),
            };
            if rr + rc == 0 {
                return Err(Error::Invalid("a number field has at least one place".into()));
            }
            let rows: Vec<Value> = borel_dims(rr, rc, imax)
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let x = if i >= 3 && i % 2 == 1 { json!(x_space_dim(rr, rc, (i as u32).div_ceil(2))) } else { Value::Null };
                    json!({"i": i, "dim": d, "x_space_dim": x})
                })
                .collect();
            Ok(json!({"r_real": rr, "r_complex": rc, "rows": rows}))
        }
        Cmd::Normalize { j, value, from, to } => {
            let prec = env.precision();
            match value {
                None => {
                    let n = normalization_factors(j, prec);
                    Ok(json!({
                        "j": j,
                        "degree": 2 * j + 1,
                        "chern": fmt(&n.chern, prec),
                        "igusa": fmt(&n.igusa, prec),
                        "borel_magnitude": fmt(&n.borel_magnitude, prec),
                        "borel_i_power": n.borel_ipow,
                    }))
                }
                Some(v) => {
                    let raw = if v.starts_with('[') || v.starts_with('@') { json_arg(&v)? } else { Value::String(v) };
                    let z = diffkr::rtorsion::json_complex(&raw, prec)?;
                    let from: Normalization = from.parse()?;
                    let to: Normalization = to.parse()?;
                    let w = convert(&z, j, from, to, prec);
                    Ok(json!({
                        "j": j,
                        "from": from.to_string(),
                        "to": to.to_string(),
                        "re": fmt(w.real(), prec),
                        "im": fmt(w.imag(), prec),
                    }))
                }
            }
        }
        Cmd::Hatcher { k } => {
            let prec = env.precision();
            let h = hatcher_constant(k, prec)?;
            let a: Value = match h.a.to_u64() {
                Some(a) => json!(a),
                None => json!(h.a.to_string()),
            };
            Ok(json!({"k": k, "a": a, "kappa": mp::fmt_rational(&h.kappa), "value": fmt(&h.value, prec)}))
        }
    }
}

fn per_place_matrices(v: &Value, places: usize, prec: Precision) -> Result<Vec<CMatrix>> {
    let a = v.as_array().ok_or_else(|| Error::Parse("expected one matrix per place".into()))?;
    if a.len() != places {
        return Err(Error::Dimension(format!("expected {places} matrices, got {}", a.len())));
    }
    a.iter()
        .map(|m| {
            let n = m.as_array().map_or(0, Vec::len);
            parse_cmatrix(m, n, n, prec)
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(v) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&v).expect("serializable")),
                Format::Table => print!("{}", table::render(&v)),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
