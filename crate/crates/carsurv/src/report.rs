//! Report emission: fixed-schema CSVs and optional SVG power curves.
//!
//! Numbers are formatted with Rust's shortest round-trip float display, so
//! a report is byte-identical across runs and thread counts.

use crate::asymptotics::{EfficacyComponents, LimitComponents};
use crate::harness::SimReport;
use crate::randomization::{format_label, ImbalanceMoments, ImbalanceReport};
use crate::test_stats::TestReport;

/// `case,scheme,n,theta,family,R,reject_rate,mc_se,failures`
pub fn sim_report_csv(report: &SimReport) -> String {
    let mut out = String::from("case,scheme,n,theta,family,R,reject_rate,mc_se,failures\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.case_id,
            row.scheme,
            row.n,
            row.theta,
            row.family.label(),
            row.replicates,
            row.reject_rate,
            row.mc_se,
            row.failures
        ));
    }
    out
}

/// `family,statistic,variance,nu_d,reject`
pub fn test_reports_csv(reports: &[TestReport]) -> String {
    let mut out = String::from("family,statistic,variance,nu_d,reject\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.family.label(),
            r.statistic,
            r.variance,
            r.nu_d.map(|v| v.to_string()).unwrap_or_default(),
            u8::from(r.reject)
        ));
    }
    out
}

/// `stratum,n_z,D_n,D_over_sqrt_nz`
pub fn imbalance_report_csv(report: &ImbalanceReport) -> String {
    let mut out = String::from("stratum,n_z,D_n,D_over_sqrt_nz\n");
    for (label, s) in &report.strata {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_label(label),
            s.n,
            s.imbalance,
            s.normalized
        ));
    }
    out
}

/// Per-stratum imbalance moments over replicated runs.
pub fn imbalance_moments_csv(moments: &ImbalanceMoments) -> String {
    let mut out = String::from(
        "stratum,n,replicates,mean_n,mean_D,var_D,var_D_se,var_D_over_n,\
         mean_norm,var_norm,var_norm_se,max_abs_D\n",
    );
    for (label, row) in &moments.strata {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            format_label(label),
            moments.n,
            row.present,
            row.mean_n,
            row.mean_d,
            row.var_d,
            row.var_d_se,
            row.var_d_over_n,
            row.mean_norm,
            row.var_norm,
            row.var_norm_se,
            row.max_abs_d
        ));
    }
    out
}

/// `case,scheme,mode,A,B,nu_d,predicted_type1,sigma_s2,sigma_l2,sigma_c2,are`
pub fn asymptotics_csv(
    components: &LimitComponents,
    predicted: Option<f64>,
    efficacy: Option<&EfficacyComponents>,
) -> String {
    let mut out =
        String::from("case,scheme,mode,A,B,nu_d,predicted_type1,sigma_s2,sigma_l2,sigma_c2,are\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{}\n",
        components.case_id,
        components.scheme,
        components.mode.name(),
        components.within_var,
        components.between_var,
        opt(components.nu_d),
        opt(predicted),
        opt(efficacy.map(|e| e.sigma_s2)),
        opt(efficacy.map(|e| e.sigma_l2)),
        opt(efficacy.map(|e| e.sigma_c2)),
        opt(efficacy.map(|e| e.are)),
    ));
    out
}

const SVG_COLORS: &[&str] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
]
.as_slice();

/// Power curves, one polyline per (scheme, family) pair.
pub fn power_curves_svg(report: &SimReport) -> String {
    let (width, height) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 20.0, 20.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &report.rows {
        let key = format!("{} / {}", row.scheme, row.family.label());
        match curves.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((row.theta, row.reject_rate)),
            None => curves.push((key, vec![(row.theta, row.reject_rate)])),
        }
    }
    let xs: Vec<f64> = report.rows.iter().map(|r| r.theta).collect();
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if (x_max - x_min).abs() < 1e-12 {
        1.0
    } else {
        x_max - x_min
    };
    let to_x = |t: f64| left + (t - x_min) / span * plot_w;
    let to_y = |p: f64| top + (1.0 - p) * plot_h;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    );
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h,
        top + plot_h,
    ));
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = to_y(tick);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{left}\" y2=\"{y}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{tick}</text>\n",
            left - 5.0,
            left - 8.0,
            y + 4.0
        ));
    }
    for i in 0..=4 {
        let t = x_min + span * f64::from(i) / 4.0;
        let x = to_x(t);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{:.2}</text>\n",
            top + plot_h,
            top + plot_h + 5.0,
            top + plot_h + 18.0,
            t
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">treatment effect</text>\n\
         <text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 14 {})\">rejection rate</text>\n",
        left + plot_w / 2.0,
        height - 12.0,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    ));
    for (idx, (name, points)) in curves.iter().enumerate() {
        let color = SVG_COLORS[idx % SVG_COLORS.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(t, p)| format!("{:.2},{:.2}", to_x(t), to_y(p)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        for &(t, p) in points {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                to_x(t),
                to_y(p)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{name}</text>\n",
            left + plot_w - 150.0,
            top + 14.0 * (idx as f64 + 1.0)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SimRow;
    use crate::test_stats::TestFamily;

    fn report() -> SimReport {
        SimReport {
            rows: vec![
                SimRow {
                    case_id: 1,
                    scheme: "permuted-block".into(),
                    n: 100,
                    theta: 0.0,
                    family: TestFamily::LogRank,
                    replicates: 50,
                    reject_rate: 0.02,
                    mc_se: 0.0198,
                    failures: 0,
                },
                SimRow {
                    case_id: 1,
                    scheme: "permuted-block".into(),
                    n: 100,
                    theta: 0.4,
                    family: TestFamily::LogRank,
                    replicates: 50,
                    reject_rate: 0.56,
                    mc_se: 0.07,
                    failures: 0,
                },
            ],
        }
    }

    #[test]
    fn sim_csv_has_fixed_header_and_rows() {
        let csv = sim_report_csv(&report());
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "case,scheme,n,theta,family,R,reject_rate,mc_se,failures"
        );
        assert_eq!(
            lines.next().unwrap(),
            "1,permuted-block,100,0,T_L,50,0.02,0.0198,0"
        );
    }

    #[test]
    fn test_report_csv_encodes_missing_nu_as_empty() {
        let rows = vec![TestReport {
            family: TestFamily::Score,
            statistic: 1.5,
            variance: 0.2,
            nu_d: None,
            reject: false,
        }];
        let csv = test_reports_csv(&rows);
        assert!(csv.contains("T_S,1.5,0.2,,0"));
    }

    #[test]
    fn svg_contains_curves_and_axes() {
        let svg = power_curves_svg(&report());
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("permuted-block / T_L"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
