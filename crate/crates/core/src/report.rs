//! Markdown tables and plot data from sweep CSVs.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tune::{SweepParam, SweepRecord};

/// A titled sweep, usually one CSV file.
#[derive(Debug, Clone)]
pub struct Section {
    pub title: String,
    pub records: Vec<SweepRecord>,
}

/// An `x y` column file for external plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub name: String,
    pub contents: String,
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        "n/a".to_owned()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{v:.2}")
    }
}

fn param_of(section: &Section) -> Result<SweepParam> {
    let first = section
        .records
        .first()
        .ok_or_else(|| Error::Csv(format!("{}: no sweep rows", section.title)))?
        .param_name;
    if section.records.iter().any(|r| r.param_name != first) {
        return Err(Error::Csv(format!("{}: rows mix several parameters", section.title)));
    }
    Ok(first)
}

fn value_cell(param: SweepParam, v: f64) -> String {
    match param {
        SweepParam::P => format!("{v}"),
        _ => format!("{v:.0}"),
    }
}

/// One markdown section per sweep: `param | PSNR | ∇PSNR | t | ∇t`.
pub fn markdown(sections: &[Section]) -> Result<String> {
    if sections.is_empty() {
        return Err(Error::Csv("no sweeps to report".into()));
    }
    let mut out = String::new();
    for (i, section) in sections.iter().enumerate() {
        let param = param_of(section)?;
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "## {}\n", section.title);
        let _ = writeln!(out, "| {param} | PSNR | ∇PSNR | t | ∇t |");
        out.push_str("|---:|---:|---:|---:|---:|\n");
        for r in &section.records {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                value_cell(param, r.param_value),
                cell(r.psnr_db),
                cell(r.grad_psnr),
                cell(r.wall_seconds),
                cell(r.grad_time)
            );
        }
    }
    Ok(out)
}

/// Two files per sweep, `<stem>_psnr.dat` and `<stem>_time.dat`. Failed rows are skipped.
pub fn plot_data(stem: &str, section: &Section) -> Result<Vec<PlotData>> {
    let param = param_of(section)?;
    let column = |label: &str, pick: fn(&SweepRecord) -> f64| {
        let mut s = format!("# {param} {label}\n");
        for r in section.records.iter().filter(|r| pick(r).is_finite()) {
            let _ = writeln!(s, "{} {}", r.param_value, pick(r));
        }
        s
    };
    Ok(vec![
        PlotData {
            name: format!("{stem}_psnr.dat"),
            contents: column("psnr", |r| r.psnr_db),
        },
        PlotData {
            name: format!("{stem}_time.dat"),
            contents: column("seconds", |r| r.wall_seconds),
        },
    ])
}
