//! Structured run reports: per-item verdicts with witnesses, numeric
//! tables, and byte-deterministic JSON/CSV emission.

use crate::gauge::Ctx;
use crate::verdict::{Truth, Verdict, Witness};

#[derive(Clone, Debug)]
pub struct ReportItem {
    pub name: String,
    pub verdict: Option<Verdict>,
    pub value: Option<f64>,
    pub exponent: Option<f64>,
    pub note: String,
    pub pass: bool,
}

impl ReportItem {
    pub fn verdict(name: impl Into<String>, v: Verdict, pass: bool) -> ReportItem {
        ReportItem {
            name: name.into(),
            verdict: Some(v),
            value: None,
            exponent: None,
            note: String::new(),
            pass,
        }
    }

    pub fn value(name: impl Into<String>, v: f64, pass: bool) -> ReportItem {
        ReportItem {
            name: name.into(),
            verdict: None,
            value: Some(v),
            exponent: None,
            note: String::new(),
            pass,
        }
    }

    pub fn exponent(name: impl Into<String>, e: f64, pass: bool) -> ReportItem {
        ReportItem {
            name: name.into(),
            verdict: None,
            value: None,
            exponent: Some(e),
            note: String::new(),
            pass,
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> ReportItem {
        self.note = note.into();
        self
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub gauge: String,
    pub grid_kmin: u32,
    pub grid_kmax: u32,
    pub tail_window: usize,
    pub items: Vec<ReportItem>,
    pub tables: Vec<Table>,
}

/// 17 significant digits, locale-free.
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.16e}", v)
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn truth_str(t: Truth) -> &'static str {
    match t {
        Truth::True => "true",
        Truth::False => "false",
        Truth::Indeterminate => "indeterminate",
    }
}

fn witness_json(w: &Witness) -> String {
    match w {
        Witness::Power { m } => format!(",\"witness_m\":{}", m),
        Witness::Real { r } => format!(",\"witness_r\":\"{}\"", fmt_f(*r)),
        Witness::Exponent { e } => format!(",\"witness_e\":\"{}\"", fmt_f(*e)),
        Witness::ZeroNet => ",\"witness_zero\":true".into(),
        Witness::None => String::new(),
    }
}

fn witness_csv(w: &Witness) -> String {
    match w {
        Witness::Power { m } => format!("m={}", m),
        Witness::Real { r } => format!("r={}", fmt_f(*r)),
        Witness::Exponent { e } => format!("e={}", fmt_f(*e)),
        Witness::ZeroNet => "zero_net".into(),
        Witness::None => String::new(),
    }
}

impl Report {
    pub fn new(command: impl Into<String>, ctx: &Ctx) -> Report {
        Report {
            command: command.into(),
            gauge: ctx.gauge.name().into(),
            grid_kmin: ctx.cfg.grid_kmin,
            grid_kmax: ctx.cfg.grid_kmax,
            tail_window: ctx.cfg.tail_window,
            items: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn push(&mut self, item: ReportItem) {
        self.items.push(item);
    }

    pub fn push_table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    /// Hand-assembled JSON with fixed field order for byte determinism.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        s.push_str(&format!("  \"command\": \"{}\",\n", json_escape(&self.command)));
        s.push_str(&format!(
            "  \"config\": {{\"gauge\": \"{}\", \"grid_kmin\": {}, \"grid_kmax\": {}, \"tail_window\": {}}},\n",
            self.gauge, self.grid_kmin, self.grid_kmax, self.tail_window
        ));
        s.push_str("  \"items\": [\n");
        for (n, it) in self.items.iter().enumerate() {
            s.push_str(&format!("    {{\"name\":\"{}\"", json_escape(&it.name)));
            if let Some(v) = &it.verdict {
                s.push_str(&format!(",\"verdict\":\"{}\"", truth_str(v.value)));
                s.push_str(&witness_json(&v.witness));
                if v.value == Truth::Indeterminate {
                    s.push_str(&format!(",\"reason\":\"{}\"", json_escape(&v.diagnostics)));
                }
            }
            if let Some(v) = it.value {
                s.push_str(&format!(",\"value\":\"{}\"", fmt_f(v)));
            }
            if let Some(e) = it.exponent {
                s.push_str(&format!(",\"exponent\":\"{}\"", fmt_f(e)));
            }
            if !it.note.is_empty() {
                s.push_str(&format!(",\"note\":\"{}\"", json_escape(&it.note)));
            }
            s.push_str(&format!(",\"pass\":{}}}", it.pass));
            s.push_str(if n + 1 < self.items.len() { ",\n" } else { "\n" });
        }
        s.push_str("  ],\n");
        s.push_str("  \"tables\": [\n");
        for (n, t) in self.tables.iter().enumerate() {
            s.push_str(&format!("    {{\"name\":\"{}\",\"columns\":[", json_escape(&t.name)));
            s.push_str(
                &t.columns
                    .iter()
                    .map(|c| format!("\"{}\"", json_escape(c)))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            s.push_str("],\"rows\":[");
            s.push_str(
                &t.rows
                    .iter()
                    .map(|r| {
                        format!(
                            "[{}]",
                            r.iter()
                                .map(|&v| format!("\"{}\"", fmt_f(v)))
                                .collect::<Vec<_>>()
                                .join(",")
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(","),
            );
            s.push_str("]}");
            s.push_str(if n + 1 < self.tables.len() { ",\n" } else { "\n" });
        }
        s.push_str("  ],\n");
        s.push_str(&format!("  \"pass\": {}\n", self.pass()));
        s.push_str("}\n");
        s
    }

    /// CSV with a documented header comment; items first, then each table.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# report: {}\n", self.command));
        s.push_str(&format!(
            "# config: gauge={} grid={}:{} tail_window={}\n",
            self.gauge, self.grid_kmin, self.grid_kmax, self.tail_window
        ));
        s.push_str("# items columns: name,verdict,witness,value,exponent,note,pass\n");
        for it in &self.items {
            let (verdict, witness) = match &it.verdict {
                Some(v) => (truth_str(v.value).to_string(), witness_csv(&v.witness)),
                None => (String::new(), String::new()),
            };
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                it.name.replace(',', ";"),
                verdict,
                witness,
                it.value.map(fmt_f).unwrap_or_default(),
                it.exponent.map(fmt_f).unwrap_or_default(),
                it.note.replace(',', ";"),
                it.pass
            ));
        }
        for t in &self.tables {
            s.push_str(&format!("# table {}: {}\n", t.name, t.columns.join(",")));
            for row in &t.rows {
                s.push_str(&row.iter().map(|&v| fmt_f(v)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
        }
        s.push_str(&format!("# pass: {}\n", self.pass()));
        s
    }

    pub fn emit(&self, format: &str) -> String {
        match format {
            "csv" => self.to_csv(),
            _ => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::Context;

    #[test]
    fn empty_report_skeleton() {
        let ctx = Context::default_ctx();
        let r = Report::new("check", &ctx);
        let js = r.to_json();
        assert!(js.contains("\"gauge\": \"eps\""));
        assert!(js.contains("\"grid_kmin\": 4"));
        assert!(r.pass());
        // valid JSON
        let parsed: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(parsed["pass"], serde_json::Value::Bool(true));
    }

    #[test]
    fn witness_fields_and_determinism() {
        let ctx = Context::default_ctx();
        let mut r = Report::new("check", &ctx);
        r.push(ReportItem::verdict(
            "positivity",
            Verdict::yes(Witness::Power { m: 2 }, "ok"),
            true,
        ));
        let js = r.to_json();
        assert!(js.contains("\"verdict\":\"true\",\"witness_m\":2"));
        assert_eq!(js, r.to_json());
    }

    #[test]
    fn csv_table_rows_match() {
        let ctx = Context::default_ctx();
        let mut r = Report::new("embed", &ctx);
        r.push_table(Table {
            name: "pairing".into(),
            columns: vec!["eps".into(), "value".into(), "abs_error".into()],
            rows: vec![vec![0.5, 1.0, 0.25], vec![0.25, 1.0, 0.125]],
        });
        let csv = r.to_csv();
        assert!(csv.contains("# table pairing: eps,value,abs_error"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 2);
    }
}
