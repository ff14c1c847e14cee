//! JSON forms of coefficient rows and of initial data.

use std::collections::BTreeMap;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numeric::{parse_exact_decimal, rational_parts, BigComplex, ComplexInput, GaussianRational, Real};

use super::burgers::CoeffTable;
use super::kdvb::{ExpSeries, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub h: u32,
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re_num: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re_den: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im_num: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im_den: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableJson {
    /// `"burgers"` or `"kdvb"`.
    pub kind: String,
    pub k: u32,
    pub nu: String,
    pub alpha: String,
    pub exact: bool,
    /// Burgers amplitude `a`, or `a_k(0)` for KdV–Burgers rows.
    pub a0: EntryValue,
    /// Burgers rows use `h = l = m`.
    pub entries: Vec<EntryJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryValue {
    pub re: String,
    pub im: String,
}

fn exact_entry(h: u32, l: u32, c: &GaussianRational) -> EntryJson {
    let (rn, rd) = rational_parts(&c.re);
    let (inn, ind) = rational_parts(&c.im);
    EntryJson {
        h,
        l,
        re_num: Some(rn),
        re_den: Some(rd),
        im_num: Some(inn),
        im_den: Some(ind),
        re: None,
        im: None,
    }
}

fn float_entry(h: u32, l: u32, c: &BigComplex) -> EntryJson {
    EntryJson {
        h,
        l,
        re_num: None,
        re_den: None,
        im_num: None,
        im_den: None,
        re: Some(float_string(&c.re)),
        im: Some(float_string(&c.im)),
    }
}

/// Decimal digits sufficient to recover the float exactly.
pub fn float_string(x: &Float) -> String {
    x.to_string_radix(10, None)
}

fn exact_value(g: &GaussianRational) -> EntryValue {
    EntryValue {
        re: g.re.to_string(),
        im: g.im.to_string(),
    }
}

/// Exact reals as `p/q`, binary64 ones with the `f:` prefix.
pub fn real_string(r: &Real) -> String {
    match r {
        Real::Exact(q) => q.to_string(),
        Real::Approx(x) => format!("f:{x:?}"),
    }
}

pub fn table_to_json(table: &CoeffTable) -> TableJson {
    TableJson {
        kind: "burgers".into(),
        k: table.k,
        nu: table.nu.to_string(),
        alpha: "0".into(),
        exact: true,
        a0: exact_value(&table.a0),
        entries: table.entries.iter().map(|(m, c)| exact_entry(*m, *m, c)).collect(),
    }
}

pub fn series_to_json(series: &Series) -> TableJson {
    match series {
        Series::Exact(s) => TableJson {
            kind: "kdvb".into(),
            k: s.k,
            nu: real_string(&s.nu),
            alpha: real_string(&s.alpha),
            exact: true,
            a0: exact_value(&s.a0k),
            entries: s.terms.iter().map(|((h, l), c)| exact_entry(*h, *l, c)).collect(),
        },
        Series::Approx(s) => TableJson {
            kind: "kdvb".into(),
            k: s.k,
            nu: real_string(&s.nu),
            alpha: real_string(&s.alpha),
            exact: false,
            a0: EntryValue {
                re: float_string(&s.a0k.re),
                im: float_string(&s.a0k.im),
            },
            entries: s.terms.iter().map(|((h, l), c)| float_entry(*h, *l, c)).collect(),
        },
    }
}

fn parse_rational(num: &Option<String>, den: &Option<String>, what: &str) -> Result<Rational> {
    let (Some(n), Some(d)) = (num, den) else {
        return Err(Error::Parse(format!("entry is missing {what}_num/{what}_den")));
    };
    let s = format!("{n}/{d}");
    s.parse::<Rational>()
        .map_err(|e| Error::Parse(format!("{what}: {s}: {e}")))
}

fn parse_q(s: &str, what: &str) -> Result<Rational> {
    s.parse::<Rational>()
        .map_err(|e| Error::Parse(format!("{what}: {s:?}: {e}")))
}

fn parse_real(s: &str, what: &str) -> Result<Real> {
    s.parse::<Real>().map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn exact_coeff(e: &EntryJson) -> Result<GaussianRational> {
    Ok(GaussianRational::new(
        parse_rational(&e.re_num, &e.re_den, "re")?,
        parse_rational(&e.im_num, &e.im_den, "im")?,
    ))
}

fn parse_float(s: &Option<String>, prec: u32, what: &str) -> Result<Float> {
    let s = s
        .as_deref()
        .ok_or_else(|| Error::Parse(format!("entry is missing {what}")))?;
    Float::parse(s)
        .map(|p| Float::with_val(prec, p))
        .map_err(|e| Error::Parse(format!("{what}: {s:?}: {e}")))
}

pub fn table_from_json(j: &TableJson) -> Result<CoeffTable> {
    if j.kind != "burgers" || !j.exact {
        return Err(Error::Parse(format!(
            "expected an exact burgers table, got kind {:?}",
            j.kind
        )));
    }
    let mut entries = BTreeMap::new();
    for e in &j.entries {
        entries.insert(e.h, exact_coeff(e)?);
    }
    Ok(CoeffTable {
        k: j.k,
        a0: GaussianRational::new(parse_q(&j.a0.re, "a0.re")?, parse_q(&j.a0.im, "a0.im")?),
        nu: parse_q(&j.nu, "nu")?,
        entries,
    })
}

/// Float rows are read back at `precision` bits.
pub fn series_from_json(j: &TableJson, precision: u32) -> Result<Series> {
    if j.kind != "kdvb" {
        return Err(Error::Parse(format!("expected a kdvb table, got kind {:?}", j.kind)));
    }
    let nu = parse_real(&j.nu, "nu")?;
    let alpha = parse_real(&j.alpha, "alpha")?;
    if j.exact {
        let mut terms = BTreeMap::new();
        for e in &j.entries {
            terms.insert((e.h, e.l), exact_coeff(e)?);
        }
        let a0k = GaussianRational::new(parse_q(&j.a0.re, "a0.re")?, parse_q(&j.a0.im, "a0.im")?);
        Ok(Series::Exact(ExpSeries {
            k: j.k,
            nu,
            alpha,
            a0k,
            terms,
        }))
    } else {
        let mut terms = BTreeMap::new();
        for e in &j.entries {
            let c = BigComplex::new(
                parse_float(&e.re, precision, "re")?,
                parse_float(&e.im, precision, "im")?,
            );
            terms.insert((e.h, e.l), c);
        }
        let a0k = BigComplex::new(
            parse_float(&Some(j.a0.re.clone()), precision, "a0.re")?,
            parse_float(&Some(j.a0.im.clone()), precision, "a0.im")?,
        );
        Ok(Series::Approx(ExpSeries {
            k: j.k,
            nu,
            alpha,
            a0k,
            terms,
        }))
    }
}

/// Read a JSON number or string as a [`Real`], keeping decimal literals exact.
pub fn json_real(v: &Value, what: &str) -> Result<Real> {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            Ok(parse_exact_decimal(&text)
                .map(Real::Exact)
                .unwrap_or_else(|| Real::Approx(n.as_f64().unwrap_or(f64::NAN))))
        }
        Value::String(s) => parse_real(s, what),
        Value::Null => Ok(Real::int(0)),
        other => Err(Error::Parse(format!("{what}: expected a number, got {other}"))),
    }
}

#[derive(Deserialize)]
struct InitJson {
    k: u32,
    #[serde(default)]
    re: Value,
    #[serde(default)]
    im: Value,
}

/// Parse `[{k, re, im}, …]` into a dense `a_{0k}` vector (missing modes are 0).
pub fn parse_initial_data(text: &str) -> Result<Vec<ComplexInput>> {
    let items: Vec<InitJson> = serde_json::from_str(text)?;
    let n = items.iter().map(|e| e.k).max().unwrap_or(0);
    let mut out = vec![ComplexInput::zero(); n as usize];
    let mut seen = vec![false; n as usize];
    for e in items {
        if e.k == 0 {
            return Err(Error::Parse("initial data uses k >= 1".into()));
        }
        let slot = e.k as usize - 1;
        if seen[slot] {
            return Err(Error::Parse(format!("initial data lists k={} twice", e.k)));
        }
        seen[slot] = true;
        let re = json_real(&e.re, "re")?;
        let im = json_real(&e.im, "im")?;
        out[slot] = ComplexInput::from_parts(re, im);
    }
    Ok(out)
}

/// Inverse of [`parse_initial_data`]; zero modes are omitted.
pub fn initial_data_json(init: &[ComplexInput]) -> Value {
    let items: Vec<Value> = init
        .iter()
        .enumerate()
        .filter(|(_, z)| match z {
            ComplexInput::Exact(g) => !g.is_zero(),
            ComplexInput::Approx(c) => c.norm_sqr() != 0.0,
        })
        .map(|(i, z)| {
            let (re, im) = match z {
                ComplexInput::Exact(g) => (g.re.to_string(), g.im.to_string()),
                ComplexInput::Approx(c) => (format!("f:{:?}", c.re), format!("f:{:?}", c.im)),
            };
            serde_json::json!({ "k": i + 1, "re": re, "im": im })
        })
        .collect();
    Value::Array(items)
}
