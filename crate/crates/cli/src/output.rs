use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use plasticwalk::config::OutputFormat;
use plasticwalk::{Mat2, C64};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// One CSV cell.
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => float17(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Where and how a command writes its result.
pub struct Sink {
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
}

impl Sink {
    fn write_to(path: Option<&Path>, text: &str) -> io::Result<()> {
        match path {
            Some(p) => fs::write(p, text),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }

    fn sidecar_path(&self) -> Option<PathBuf> {
        self.path.as_ref().map(|p| {
            if p.extension().is_some_and(|e| e == "json") {
                p.with_extension("meta.json")
            } else {
                p.with_extension("json")
            }
        })
    }

    pub fn json(&self, value: &Value) -> io::Result<()> {
        Self::write_to(self.path.as_deref(), &pretty(value))
    }

    /// CSV body plus a JSON summary next to it (`<path>.json`, or stderr
    /// when writing to stdout). In JSON mode `summary` is written with the
    /// rows embedded under `rows_key`.
    pub fn table(&self, header: &[&str], rows: Vec<Vec<Cell>>, mut summary: Value, rows_key: &str) -> io::Result<()> {
        match self.format {
            OutputFormat::Json => {
                let records = rows
                    .iter()
                    .map(|r| {
                        let obj = header
                            .iter()
                            .zip(r)
                            .map(|(h, c)| {
                                let v = match c {
                                    Cell::Int(i) => Value::from(*i),
                                    Cell::Float(f) => Value::from(*f),
                                    Cell::Text(s) => Value::from(s.clone()),
                                };
                                (h.to_string(), v)
                            })
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                summary[rows_key] = Value::Array(records);
                self.json(&summary)
            }
            OutputFormat::Csv => {
                let mut text = format!("# schema_version: {SCHEMA_VERSION}\n{}\n", header.join(","));
                for r in &rows {
                    let line: Vec<String> = r.iter().map(Cell::render).collect();
                    text.push_str(&line.join(","));
                    text.push('\n');
                }
                Self::write_to(self.path.as_deref(), &text)?;
                match self.sidecar_path() {
                    Some(p) => fs::write(p, pretty(&summary)),
                    None => io::stderr().lock().write_all(pretty(&summary).as_bytes()),
                }
            }
        }
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn complex(z: C64) -> String {
    let clean = |x: f64| if x.abs() < 1e-14 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re == 0.0, im == 0.0) {
        (true, true) => "0".into(),
        (false, true) => format!("{re:.6}"),
        (true, false) => format!("{im:.6}i"),
        (false, false) => format!("{re:.6}{}{:.6}i", if im < 0.0 { "-" } else { "+" }, im.abs()),
    }
}

pub fn matrix(m: &Mat2) -> String {
    let e = m.entries();
    format!(
        "[[{}, {}], [{}, {}]]",
        complex(e[0]),
        complex(e[1]),
        complex(e[2]),
        complex(e[3])
    )
}

fn subscript(n: usize) -> String {
    n.to_string()
        .chars()
        .map(|c| char::from_u32('₀' as u32 + c.to_digit(10).unwrap()).unwrap())
        .collect()
}

/// `lhs = [M₁]op₁ + [M₂]op₂ ...` followed by one legend line per matrix.
pub fn render_sum(lhs: &str, terms: &[(String, Mat2)]) -> String {
    if terms.is_empty() {
        return format!("{lhs} = 0");
    }
    let body: Vec<String> = terms
        .iter()
        .enumerate()
        .map(|(i, (op, _))| format!("[M{}]{op}", subscript(i + 1)))
        .collect();
    let mut out = format!("{lhs} = {}", body.join(" + "));
    for (i, (_, m)) in terms.iter().enumerate() {
        out.push_str(&format!("\n  M{} = {}", subscript(i + 1), matrix(m)));
    }
    out
}

/// `∂x`, `∂x²`, `∂x∂y` ... applied to `Ψ`.
pub fn derivative(dx: u32, dy: u32) -> String {
    let part = |name: &str, p: u32| match p {
        0 => String::new(),
        1 => format!("∂{name}"),
        p => format!("∂{name}{}", superscript(p as i64)),
    };
    format!("{}{} Ψ", part("x", dx), part("y", dy)).trim_start().to_string()
}

pub fn superscript(p: i64) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut s = String::new();
    if p < 0 {
        s.push('⁻');
    }
    for c in p.unsigned_abs().to_string().chars() {
        s.push(DIGITS[c.to_digit(10).unwrap() as usize]);
    }
    s
}

/// Shift monomial `S_x^px S_y^py`; `I` for the identity.
pub fn shift(px: i64, py: i64) -> String {
    let part = |name: &str, p: i64| match p {
        0 => String::new(),
        1 => format!("S{name}"),
        p => format!("S{name}{}", superscript(p)),
    };
    let s = format!("{}{}", part("x", px), part("y", py));
    if s.is_empty() {
        "I".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            let s = float17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(derivative(1, 0), "∂x Ψ");
        assert_eq!(derivative(0, 0), "Ψ");
        assert_eq!(derivative(2, 1), "∂x²∂y Ψ");
        assert_eq!(shift(2, -2), "Sx²Sy⁻²");
        assert_eq!(shift(0, 0), "I");
        let r = render_sum(
            "∂t Ψ",
            &[(derivative(1, 0), Mat2::IDENTITY), (derivative(0, 1), Mat2::ZERO)],
        );
        assert!(r.starts_with("∂t Ψ = [M₁]∂x Ψ + [M₂]∂y Ψ"));
        assert!(r.contains("M₁ = [[1.000000, 0], [0, 1.000000]]"));
    }
}
