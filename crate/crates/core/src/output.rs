//! Text serialization of run outputs. Every real is written with 17
//! significant digits (C `%.17g`), every line ends in `\n`, and column order
//! is fixed.

use std::fmt::Write as _;

use crate::analysis::{BinSummary, ComparisonStats, CorrelationRow, Distribution, ScatterRow};
use crate::measures::{AntifragilityResult, MeasureId};
use crate::normalize::TimeScale;
use crate::performance::PerformanceRecord;

/// Formats like C's `%.17g`: enough digits to round-trip any f64.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };

    if !(-4..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        let mant = if tail.is_empty() {
            head.to_string()
        } else {
            format!("{head}.{tail}")
        };
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{mant}e{esign}{:02}", exp.abs());
    }
    let (int_part, frac_part) = if exp >= 0 {
        let split = exp as usize + 1;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        ("0".to_string(), format!("{zeros}{digits}"))
    };
    let frac = frac_part.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Quotes a CSV field only when it needs it.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn json_real(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => fmt_real(v),
        _ => "null".to_string(),
    }
}

pub fn antifragility_csv(results: &[AntifragilityResult]) -> String {
    let mut out = String::from("agent_id,measure,scale,window,global_A,n_used\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.agent_id),
            r.measure,
            r.scale,
            csv_field(&r.window),
            fmt_real(r.global),
            r.n_used
        );
    }
    out
}

pub fn performance_csv(records: &[PerformanceRecord]) -> String {
    let mut out = String::from(
        "agent_id,window,age_days,pct_dlt_pr,pct_dlt_mk,pct_dlt_vl,pct_pr_f_i,pct_mk_f_i,pct_vl_f_i,pr_mea,pr_std,mk_mea,vl_mea,is_top_performer\n",
    );
    for p in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&p.agent_id),
            csv_field(&p.window),
            p.age_days,
            fmt_opt(p.pct_dlt_pr),
            fmt_opt(p.pct_dlt_mk),
            fmt_opt(p.pct_dlt_vl),
            fmt_opt(p.pct_pr_f_i),
            fmt_opt(p.pct_mk_f_i),
            fmt_opt(p.pct_vl_f_i),
            fmt_opt(p.pr_mea),
            fmt_opt(p.pr_std),
            fmt_opt(p.mk_mea),
            fmt_opt(p.vl_mea),
            p.is_top_performer
        );
    }
    out
}

pub fn scatter_csv(rows: &[ScatterRow]) -> String {
    let mut out = String::from("window,measure,scale,agent_id,A,perf_variable,perf_value\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.window),
            r.measure,
            r.scale,
            csv_field(&r.agent_id),
            fmt_real(r.antifragility),
            r.variable,
            fmt_real(r.value)
        );
    }
    out
}

pub fn correlations_csv(rows: &[CorrelationRow]) -> String {
    let mut out = String::from("window,measure,scale,perf_variable,n,pearson_r\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.window),
            r.measure,
            r.scale,
            r.variable,
            r.n,
            fmt_opt(r.r)
        );
    }
    out
}

/// A bin summary tagged with the case it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct BinRow {
    pub window: String,
    pub measure: MeasureId,
    pub scale: TimeScale,
    pub summary: BinSummary,
}

pub fn bins_csv(rows: &[BinRow]) -> String {
    let mut out =
        String::from("window,measure,scale,bin_by,stat_of,bin_index,count,min,mean,max\n");
    for r in rows {
        let s = &r.summary;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.window),
            r.measure,
            r.scale,
            s.bin_by,
            s.stat_of,
            s.bin_index,
            s.count,
            fmt_real(s.min),
            fmt_real(s.mean),
            fmt_real(s.max)
        );
    }
    out
}

/// A histogram of global A for one case, over all agents or over top performers.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    pub window: String,
    pub measure: MeasureId,
    pub scale: TimeScale,
    pub group: &'static str,
    pub distribution: Distribution,
}

pub fn distributions_csv(rows: &[DistributionRow]) -> String {
    let mut out = String::from(
        "window,measure,scale,group,bin_index,left_edge,right_edge,density,sample_count\n",
    );
    for r in rows {
        let d = &r.distribution;
        for (j, (dens, e)) in d.densities.iter().zip(d.bin_edges.windows(2)).enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                csv_field(&r.window),
                r.measure,
                r.scale,
                r.group,
                j,
                fmt_real(e[0]),
                fmt_real(e[1]),
                fmt_real(*dens),
                d.sample_count
            );
        }
    }
    out
}

pub fn comparison_json(stats: &ComparisonStats) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"cases_total\": {},", stats.cases_total);
    let _ = writeln!(out, "  \"cases_top_greater\": {},", stats.cases_top_greater);
    let _ = writeln!(
        out,
        "  \"fraction_top_greater\": {},",
        json_real(Some(stats.fraction_top_greater))
    );
    let _ = writeln!(
        out,
        "  \"sum_diff_when_greater\": {},",
        json_real(Some(stats.sum_diff_when_greater))
    );
    let _ = writeln!(
        out,
        "  \"sum_diff_otherwise\": {},",
        json_real(Some(stats.sum_diff_otherwise))
    );
    let _ = writeln!(out, "  \"ratio\": {},", json_real(stats.ratio));
    out.push_str("  \"cases\": [");
    for (i, c) in stats.cases.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(
            out,
            "    {{\"window\": {}, \"measure\": \"{}\", \"scale\": {}, \"n_all\": {}, \"n_top\": {}, \"mean_all\": {}, \"mean_top\": {}}}",
            json_str(&c.window),
            c.measure,
            c.scale,
            c.n_all,
            c.n_top,
            json_real(Some(c.mean_all)),
            json_real(Some(c.mean_top))
        );
    }
    out.push_str(if stats.cases.is_empty() {
        "]\n"
    } else {
        "\n  ]\n"
    });
    out.push_str("}\n");
    out
}
