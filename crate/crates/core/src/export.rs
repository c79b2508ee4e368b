//! CSV and JSON emitters. Every CSV starts with a `#` comment line naming the
//! schema and its version; floats use the shortest round-trip form, so output
//! is byte-identical across runs.

use std::io::Write;

use serde::Serialize;

use crate::bounds::BoundReport;
use crate::coherent::LimitRow;
use crate::error::Result;
use crate::smoothed::{HeatRow, RieszRow};
use crate::spectrum::SpectrumSlice;

pub const SCHEMA_VERSION: u32 = 1;

fn preamble<W: Write>(out: &mut W, schema: &str, context: &str) -> Result<()> {
    if context.is_empty() {
        writeln!(out, "# fracspec {schema} v{SCHEMA_VERSION}")?;
    } else {
        writeln!(out, "# fracspec {schema} v{SCHEMA_VERSION} {context}")?;
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn slice_context(slice: &SpectrumSlice) -> String {
    let p = &slice.params;
    format!("d={} s={} L={} unit={}", p.dim(), p.order(), p.side(), p.unit())
}

/// `index_1,…,index_d,value,multiplicity_class`, where the class is the
/// 1-based ordinal of the eigenvalue's tie group.
pub fn write_spectrum_csv<W: Write>(out: &mut W, slice: &SpectrumSlice) -> Result<()> {
    preamble(out, "spectrum", &slice_context(slice))?;
    let mut w = csv::Writer::from_writer(out);
    let d = slice.params.dim();
    let mut header: Vec<String> = (1..=d).map(|i| format!("index_{i}")).collect();
    header.push("value".into());
    header.push("multiplicity_class".into());
    w.write_record(&header)?;
    for r in &slice.records {
        let mut row: Vec<String> = r.index.iter().map(|c| c.to_string()).collect();
        row.push(num(r.value));
        row.push(r.level.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    schema: &'static str,
    version: u32,
    d: usize,
    s: f64,
    side: f64,
    unit: f64,
    records: Vec<SpectrumJsonRecord<'a>>,
}

#[derive(Serialize)]
struct SpectrumJsonRecord<'a> {
    index: &'a [u32],
    value: f64,
    multiplicity: u32,
    multiplicity_class: u32,
}

pub fn write_spectrum_json<W: Write>(out: &mut W, slice: &SpectrumSlice) -> Result<()> {
    let p = &slice.params;
    let doc = SpectrumJson {
        schema: "spectrum",
        version: SCHEMA_VERSION,
        d: p.dim(),
        s: p.order(),
        side: p.side(),
        unit: p.unit(),
        records: slice
            .records
            .iter()
            .map(|r| SpectrumJsonRecord {
                index: &r.index,
                value: r.value,
                multiplicity: r.multiplicity,
                multiplicity_class: r.level,
            })
            .collect(),
    };
    write_json(out, &doc)
}

/// `quantity,param_point,exact,bound,margin,satisfied`.
pub fn write_reports_csv<W: Write>(out: &mut W, reports: &[BoundReport]) -> Result<()> {
    preamble(out, "bounds-scan", "")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "param_point", "exact", "bound", "margin", "satisfied"])?;
    for r in reports {
        w.write_record([
            r.quantity.clone(),
            r.param_point.clone(),
            num(r.exact),
            num(r.bound),
            num(r.margin),
            r.satisfied.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `t,Z_exact,Z_asymptote,Z_bound`.
pub fn write_heat_csv<W: Write>(out: &mut W, context: &str, rows: &[HeatRow]) -> Result<()> {
    preamble(out, "heat", context)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "Z_exact", "Z_asymptote", "Z_bound"])?;
    for r in rows {
        w.write_record([num(r.t), num(r.z_exact), num(r.z_asymptote), num(r.z_bound)])?;
    }
    w.flush()?;
    Ok(())
}

/// `E,rho,R_exact,R_asymptote,R_bound`; the bound is empty for `ρ ≤ 1`.
pub fn write_riesz_csv<W: Write>(out: &mut W, context: &str, rows: &[RieszRow]) -> Result<()> {
    preamble(out, "riesz", context)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["E", "rho", "R_exact", "R_asymptote", "R_bound"])?;
    for r in rows {
        w.write_record([
            num(r.energy),
            num(r.rho),
            num(r.r_exact),
            num(r.r_asymptote),
            r.r_bound.map(num).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `hbar,expectation,limit,gap`.
pub fn write_limit_csv<W: Write>(out: &mut W, context: &str, rows: &[LimitRow]) -> Result<()> {
    preamble(out, "coherent-limit", context)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["hbar", "expectation", "limit", "gap"])?;
    for r in rows {
        w.write_record([num(r.hbar), num(r.expectation), num(r.limit), num(r.gap)])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{enumerate_up_to, SpectralParams};
    use std::f64::consts::PI;

    #[test]
    fn spectrum_csv_layout() {
        let p = SpectralParams::new(2, 1.0, PI).unwrap();
        let slice = enumerate_up_to(&p, 8.0).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &slice).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# fracspec spectrum v1"));
        assert_eq!(lines[1], "index_1,index_2,value,multiplicity_class");
        assert_eq!(lines.len(), 2 + 4);
        assert!(lines[2].starts_with("1,1,2"));
        assert!(lines[3].ends_with(",2") && lines[4].ends_with(",2"));
        assert!(lines[5].ends_with(",3"));

        let mut js = Vec::new();
        write_spectrum_json(&mut js, &slice).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 4);
        assert_eq!(v["records"][1]["multiplicity"], 2);
    }

    #[test]
    fn riesz_csv_leaves_missing_bound_empty() {
        let rows = [RieszRow { energy: 10.0, rho: 1.0, r_exact: 3.0, r_asymptote: 2.5, r_bound: None }];
        let mut buf = Vec::new();
        write_riesz_csv(&mut buf, "", &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(2).unwrap(), "10,1,3,2.5,");
    }
}
