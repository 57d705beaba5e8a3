//! Run configuration files.
//!
//! A configuration is flat `key = value` text under `[section]` headers.
//! `#` starts a comment. Values are numbers, bare words or parenthesised
//! tuples. A file whose first non-blank character is `{` is instead read as
//! the JSON written by `reduce`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_form::NormalFormCoeffs;
use crate::poly::Exponent;
use crate::simulate::IntegratorConfig;
use crate::system::OscillatorSystem;
use crate::torus::{CrossingDirection, SectionConfig};
use crate::versal::{physical_to_unfolding, PhysicalParams, UnfoldingPoint};

/// What the run is about: a physical system, or normal-form coefficients
/// given directly.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    System(OscillatorSystem),
    Coefficients(NormalFormCoeffs),
}

/// Settings of `[section]`; unset fields take per-model defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SectionSettings {
    pub normal: Option<Vec<f64>>,
    pub offset: Option<f64>,
    pub direction: Option<CrossingDirection>,
    pub transient_skip: Option<f64>,
    pub refine_tol: Option<f64>,
    pub tangency_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    /// From `[alpha]`, or from the reduce record.
    pub alpha: Option<UnfoldingPoint>,
    pub integrator: IntegratorConfig,
    pub section: SectionSettings,
    pub initial: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    pub complement: Option<String>,
}

/// Default section transient, in time units.
pub const DEFAULT_TRANSIENT: f64 = 200.0;

impl RunConfig {
    /// Unfolding point of the run: explicit `[alpha]` first, then the image
    /// of the physical parameters.
    pub fn unfolding_point(&self) -> Result<UnfoldingPoint> {
        if let Some(a) = self.alpha {
            return Ok(a);
        }
        match &self.model {
            Model::System(s) => Ok(physical_to_unfolding(s.mu)),
            Model::Coefficients(_) => Err(Error::validation(
                "coefficient mode needs an [alpha] section or --alpha",
            )),
        }
    }

    /// The section plane: `y = 0` upward for a system, `y₂ = 0` upward for
    /// the normal form, overridden by `[section]`.
    pub fn section_config(&self) -> SectionConfig {
        let default_component = match self.model {
            Model::System(_) => 2,
            Model::Coefficients(_) => 1,
        };
        let mut cfg = SectionConfig::coordinate(4, default_component, DEFAULT_TRANSIENT);
        let s = &self.section;
        if let Some(n) = &s.normal {
            cfg.normal = n.clone();
        }
        if let Some(v) = s.offset {
            cfg.offset = v;
        }
        if let Some(v) = s.direction {
            cfg.direction = v;
        }
        if let Some(v) = s.transient_skip {
            cfg.transient_skip = v;
        }
        if let Some(v) = s.refine_tol {
            cfg.refine_tol = v;
        }
        if let Some(v) = s.tangency_tol {
            cfg.tangency_tol = v;
        }
        cfg
    }
}

/// Coefficients as named JSON fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub phi1_10: f64,
    pub phi1_01: f64,
    pub phi2_10: f64,
    pub phi2_01: f64,
    pub phi3_10: f64,
    pub phi3_01: f64,
    pub phi4_10: f64,
    pub phi4_01: f64,
    pub c: f64,
    pub d: f64,
}

impl From<&NormalFormCoeffs> for CoefficientRecord {
    fn from(n: &NormalFormCoeffs) -> Self {
        let f = n.flat();
        Self {
            phi1_10: f[0],
            phi1_01: f[1],
            phi2_10: f[2],
            phi2_01: f[3],
            phi3_10: f[4],
            phi3_01: f[5],
            phi4_10: f[6],
            phi4_01: f[7],
            c: n.c,
            d: n.d,
        }
    }
}

impl From<&CoefficientRecord> for NormalFormCoeffs {
    fn from(r: &CoefficientRecord) -> Self {
        let mut n = NormalFormCoeffs::from_flat([
            r.phi1_10, r.phi1_01, r.phi2_10, r.phi2_01, r.phi3_10, r.phi3_01, r.phi4_10, r.phi4_01,
        ]);
        n.c = r.c;
        n.d = r.d;
        n
    }
}

/// Output of `reduce`, accepted back as input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceRecord {
    pub complement: String,
    pub alpha: Option<UnfoldingPoint>,
    pub coefficients: CoefficientRecord,
    #[serde(default)]
    pub homological_residual: Option<f64>,
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), format!("cannot read file: {e}")))?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, source: &str) -> Result<RunConfig> {
    if text.trim_start().starts_with('{') {
        parse_json(text, source)
    } else {
        parse_text(text, source)
    }
}

fn parse_json(text: &str, source: &str) -> Result<RunConfig> {
    let rec: ReduceRecord = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("{}:{}:{}", source, e.line(), e.column()), e.to_string())
    })?;
    let coeffs = NormalFormCoeffs::from(&rec.coefficients);
    if !coeffs.is_finite() {
        return Err(Error::parse(source, "coefficients must be finite"));
    }
    Ok(RunConfig {
        model: Model::Coefficients(coeffs),
        alpha: rec.alpha,
        integrator: IntegratorConfig::default(),
        section: SectionSettings::default(),
        initial: None,
        t_end: None,
        complement: Some(rec.complement),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Word(String),
    Tuple(Vec<Value>),
}

struct ValueParser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
}

impl<'a> ValueParser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.char_indices().peekable(),
            text,
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn value(&mut self) -> std::result::Result<Value, String> {
        self.skip_ws();
        match self.chars.peek().copied() {
            None => Err("missing value".into()),
            Some((_, '(')) => {
                self.chars.next();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if let Some((_, ')')) = self.chars.peek() {
                        self.chars.next();
                        break;
                    }
                    items.push(self.value()?);
                    self.skip_ws();
                    match self.chars.next() {
                        Some((_, ',')) => continue,
                        Some((_, ')')) => break,
                        Some((_, c)) => return Err(format!("unexpected `{c}` in tuple")),
                        None => return Err("unclosed `(`".into()),
                    }
                }
                Ok(Value::Tuple(items))
            }
            Some((start, _)) => {
                let mut end = self.text.len();
                while let Some(&(i, c)) = self.chars.peek() {
                    if c == ',' || c == ')' || c == '(' || c.is_whitespace() {
                        end = i;
                        break;
                    }
                    self.chars.next();
                }
                let tok = &self.text[start..end];
                Ok(match tok.parse::<f64>() {
                    Ok(v) => Value::Number(v),
                    Err(_) => Value::Word(tok.to_string()),
                })
            }
        }
    }

    fn parse_all(text: &'a str) -> std::result::Result<Value, String> {
        let mut p = Self::new(text);
        let v = p.value()?;
        p.skip_ws();
        if let Some((_, c)) = p.chars.next() {
            return Err(format!("trailing `{c}` after value"));
        }
        Ok(v)
    }
}

fn number(v: &Value) -> std::result::Result<f64, String> {
    match v {
        Value::Number(x) if x.is_finite() => Ok(*x),
        Value::Number(_) => Err("number must be finite".into()),
        _ => Err("expected a number".into()),
    }
}

fn numbers(v: &Value) -> std::result::Result<Vec<f64>, String> {
    match v {
        Value::Tuple(items) => items.iter().map(number).collect(),
        _ => Err("expected a tuple of numbers".into()),
    }
}

fn count(v: &Value) -> std::result::Result<usize, String> {
    let x = number(v)?;
    if x >= 0.0 && x.fract() == 0.0 && x <= 1e15 {
        Ok(x as usize)
    } else {
        Err("expected a nonnegative integer".into())
    }
}

/// `(component, (e1, e2, e3, e4), coefficient)`.
fn cubic_term(v: &Value) -> std::result::Result<(usize, Exponent, f64), String> {
    let items = match v {
        Value::Tuple(items) if items.len() == 3 => items,
        _ => return Err("cubic term must be (component, (e1, e2, e3, e4), coefficient)".into()),
    };
    let comp = count(&items[0])?;
    if comp != 1 && comp != 2 {
        return Err(format!("cubic term component must be 1 or 2, got {comp}"));
    }
    let e = numbers(&items[1])?;
    if e.len() != 4 {
        return Err("exponent tuple needs four entries over (x, x', y, y')".into());
    }
    let mut exp = [0u8; 4];
    for (k, &x) in e.iter().enumerate() {
        if !(x >= 0.0 && x.fract() == 0.0 && x <= 3.0) {
            return Err(format!("exponent entries must be integers in 0..=3, got {x}"));
        }
        exp[k] = x as u8;
    }
    Ok((comp, exp, number(&items[2])?))
}

fn parse_text(text: &str, source: &str) -> Result<RunConfig> {
    let mut section = String::new();
    let mut mu: [Option<f64>; 3] = [None; 3];
    let mut system_seen = false;
    let mut terms: Vec<(usize, Exponent, f64)> = Vec::new();
    let mut coeff: [Option<f64>; 10] = [None; 10];
    let mut coeff_seen = false;
    let mut alpha: [Option<f64>; 3] = [None; 3];
    let mut alpha_seen = false;
    let mut integrator = IntegratorConfig::default();
    let mut sec = SectionSettings::default();
    let mut initial = None;
    let mut t_end = None;
    let mut complement = None;

    const COEFF_KEYS: [&str; 10] = [
        "phi1_10", "phi1_01", "phi2_10", "phi2_01", "phi3_10", "phi3_01", "phi4_10", "phi4_01", "c", "d",
    ];

    for (lineno, raw) in text.lines().enumerate() {
        let loc = format!("{}:{}", source, lineno + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(&loc, "section header must end with `]`"))?
                .trim();
            match name {
                "system" | "cubic" | "coefficients" | "alpha" | "integrator" | "section" | "run" => {}
                other => return Err(Error::parse(&loc, format!("unknown section [{other}]"))),
            }
            section = name.to_string();
            system_seen |= name == "system" || name == "cubic";
            coeff_seen |= name == "coefficients";
            alpha_seen |= name == "alpha";
            continue;
        }
        let (key, rhs) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(&loc, "expected `key = value`"))?;
        let key = key.trim();
        let value = ValueParser::parse_all(rhs.trim()).map_err(|m| Error::parse(&loc, m))?;
        let bad_key = || Error::parse(&loc, format!("unknown key `{key}` in [{section}]"));
        let wrap = |r: std::result::Result<(), String>| r.map_err(|m| Error::parse(&loc, format!("{key}: {m}")));

        match section.as_str() {
            "" => return Err(Error::parse(&loc, "key outside any section")),
            "system" => {
                let idx = ["omega", "delta1", "delta2"]
                    .iter()
                    .position(|k| *k == key)
                    .ok_or_else(bad_key)?;
                wrap(number(&value).map(|v| mu[idx] = Some(v)))?;
            }
            "cubic" => {
                if key != "term" {
                    return Err(bad_key());
                }
                wrap(cubic_term(&value).map(|t| terms.push(t)))?;
            }
            "coefficients" => {
                let idx = COEFF_KEYS.iter().position(|k| *k == key).ok_or_else(bad_key)?;
                wrap(number(&value).map(|v| coeff[idx] = Some(v)))?;
            }
            "alpha" => {
                let idx = ["alpha1", "alpha2", "alpha3"]
                    .iter()
                    .position(|k| *k == key)
                    .ok_or_else(bad_key)?;
                wrap(number(&value).map(|v| alpha[idx] = Some(v)))?;
            }
            "integrator" => match key {
                "rel_tol" => wrap(number(&value).map(|v| integrator.rel_tol = v))?,
                "abs_tol" => wrap(number(&value).map(|v| integrator.abs_tol = v))?,
                "max_step" => wrap(number(&value).map(|v| integrator.max_step = v))?,
                "min_step" => wrap(number(&value).map(|v| integrator.min_step = v))?,
                "max_steps" => wrap(count(&value).map(|v| integrator.max_steps = v))?,
                "divergence_norm" => wrap(number(&value).map(|v| integrator.divergence_norm = v))?,
                _ => return Err(bad_key()),
            },
            "section" => match key {
                "normal" => wrap(numbers(&value).map(|v| sec.normal = Some(v)))?,
                "offset" => wrap(number(&value).map(|v| sec.offset = Some(v)))?,
                "transient_skip" => wrap(number(&value).map(|v| sec.transient_skip = Some(v)))?,
                "refine_tol" => wrap(number(&value).map(|v| sec.refine_tol = Some(v)))?,
                "tangency_tol" => wrap(number(&value).map(|v| sec.tangency_tol = Some(v)))?,
                "direction" => {
                    let d = match &value {
                        Value::Word(w) => match w.as_str() {
                            "positive" | "+" => CrossingDirection::Positive,
                            "negative" | "-" => CrossingDirection::Negative,
                            "both" => CrossingDirection::Both,
                            _ => return Err(Error::parse(&loc, "direction must be positive, negative or both")),
                        },
                        _ => return Err(Error::parse(&loc, "direction must be positive, negative or both")),
                    };
                    sec.direction = Some(d);
                }
                _ => return Err(bad_key()),
            },
            "run" => match key {
                "initial" => wrap(numbers(&value).map(|v| initial = Some(v)))?,
                "t_end" => wrap(number(&value).map(|v| t_end = Some(v)))?,
                "complement" => match &value {
                    Value::Word(w) => complement = Some(w.clone()),
                    _ => return Err(Error::parse(&loc, "complement must be a name")),
                },
                _ => return Err(bad_key()),
            },
            _ => unreachable!(),
        }
    }

    let model = match (system_seen, coeff_seen) {
        (true, true) => {
            return Err(Error::parse(
                source,
                "give either [system]/[cubic] or [coefficients], not both",
            ))
        }
        (false, false) => {
            return Err(Error::parse(source, "missing [system] or [coefficients] section"))
        }
        (true, false) => {
            let names = ["omega", "delta1", "delta2"];
            let mut v = [0.0; 3];
            for k in 0..3 {
                v[k] = mu[k].ok_or_else(|| Error::parse(source, format!("[system] is missing `{}`", names[k])))?;
            }
            let params = PhysicalParams::new(v[0], v[1], v[2]);
            let f1 = terms.iter().filter(|t| t.0 == 1).map(|t| (t.1, t.2));
            let f2 = terms.iter().filter(|t| t.0 == 2).map(|t| (t.1, t.2));
            let sys = OscillatorSystem::new(params, f1, f2).map_err(|e| Error::parse(source, e.to_string()))?;
            Model::System(sys)
        }
        (false, true) => {
            let mut v = [0.0; 8];
            for k in 0..8 {
                v[k] = coeff[k]
                    .ok_or_else(|| Error::parse(source, format!("[coefficients] is missing `{}`", COEFF_KEYS[k])))?;
            }
            let mut n = NormalFormCoeffs::from_flat(v);
            if let Some(c) = coeff[8] {
                n.c = c;
            }
            if let Some(d) = coeff[9] {
                n.d = d;
            }
            Model::Coefficients(n)
        }
    };
    let alpha = if alpha_seen {
        let names = ["alpha1", "alpha2", "alpha3"];
        let mut v = [0.0; 3];
        for k in 0..3 {
            v[k] = alpha[k].ok_or_else(|| Error::parse(source, format!("[alpha] is missing `{}`", names[k])))?;
        }
        Some(UnfoldingPoint::new(v[0], v[1], v[2]))
    } else {
        None
    };
    integrator
        .validate()
        .map_err(|e| Error::parse(source, format!("[integrator]: {e}")))?;
    Ok(RunConfig {
        model,
        alpha,
        integrator,
        section: sec,
        initial,
        t_end,
        complement,
    })
}
