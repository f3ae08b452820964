//! Table renderings of the verdict grid and the mistake breakdown.

use super::report::{CampaignReport, Grid, MistakeBreakdown};
use crate::distribution::{Alignment, Concentration};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected text, csv or json)")),
        }
    }
}

fn text_table(header: &[&str], rows: &[(String, Vec<usize>)]) -> String {
    let first = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0).max(header[0].chars().count());
    let widths: Vec<usize> = header[1..].iter().map(|h| h.chars().count().max(5)).collect();
    let mut out = format!("{:<first$}", header[0]);
    for (h, w) in header[1..].iter().zip(&widths) {
        out.push_str(&format!("  {h:>w$}"));
    }
    out.push('\n');
    for (label, cells) in rows {
        out.push_str(&format!("{label:<first$}"));
        for (c, w) in cells.iter().zip(&widths) {
            out.push_str(&format!("  {c:>w$}"));
        }
        out.push('\n');
    }
    out
}

fn csv_table(header: &[&str], rows: &[(String, Vec<usize>)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for (label, cells) in rows {
        let mut rec = vec![label.clone()];
        rec.extend(cells.iter().map(|c| c.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn grid_rows(g: &Grid) -> Vec<(String, Vec<usize>)> {
    Alignment::ALL
        .iter()
        .map(|a| {
            (
                a.row_label().to_string(),
                Concentration::ALL.iter().map(|c| g.get(*a, *c)).collect(),
            )
        })
        .collect()
}

pub fn render_grid(g: &Grid, format: Format) -> String {
    let header = ["", Concentration::Concentrated.column_label(), Concentration::NotConcentrated.column_label()];
    match format {
        Format::Text => text_table(&header, &grid_rows(g)),
        Format::Csv => csv_table(&header, &grid_rows(g)),
        Format::Json => serde_json::to_string_pretty(g).expect("grid serializes") + "\n",
    }
}

/// The grid of a report.
pub fn summarize(report: &CampaignReport, format: Format) -> String {
    render_grid(&report.grid, format)
}

/// Mistake counts per label with a total column; labels with no inputs
/// are omitted from the text and CSV forms.
pub fn render_mistakes(b: &MistakeBreakdown, format: Format) -> String {
    let header = ["Mistake", "Concentrated", "Not Concentrated", "Total"];
    let mut rows: Vec<(String, Vec<usize>)> = b
        .iter()
        .filter(|(_, r)| r.total() > 0)
        .map(|(l, r)| (l.description().to_string(), vec![r.concentrated, r.not_concentrated, r.total()]))
        .collect();
    let c: usize = b.values().map(|r| r.concentrated).sum();
    let n: usize = b.values().map(|r| r.not_concentrated).sum();
    rows.push(("Total".into(), vec![c, n, c + n]));
    match format {
        Format::Text => text_table(&header, &rows),
        Format::Csv => csv_table(&header, &rows),
        Format::Json => serde_json::to_string_pretty(b).expect("breakdown serializes") + "\n",
    }
}

/// Parses the CSV grid form back into counts.
pub fn parse_grid_csv(text: &str) -> Result<Grid, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut g = Grid::default();
    let mut seen = 0;
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let label = rec.get(0).ok_or("empty row")?;
        let a = Alignment::ALL
            .iter()
            .find(|a| a.row_label() == label)
            .ok_or_else(|| format!("unknown row {label:?}"))?;
        let num = |i: usize| -> Result<usize, String> {
            rec.get(i).ok_or("short row")?.parse().map_err(|e| format!("{e}"))
        };
        let row = match a {
            Alignment::Aligned => &mut g.aligned,
            Alignment::MisalignedCorrectGenerated => &mut g.misaligned_correct_generated,
            Alignment::CorrectNotGenerated => &mut g.correct_not_generated,
        };
        row.concentrated = num(1)?;
        row.not_concentrated = num(2)?;
        seen += 1;
    }
    if seen != 3 {
        return Err(format!("expected 3 rows, found {seen}"));
    }
    Ok(g)
}
