//! Published reference values for the reproduction targets and the
//! machinery that re-runs each grid cell and flags deviations.

use carsurv::harness::{estimate_rejection, SimConfig};
use carsurv::randomization::{monte_carlo_imbalance, CovariateLaw, SchemeSpec};
use carsurv::test_stats::TestFamily;
use carsurv::trial_data::CaseSpec;

use crate::{CliError, ReproduceArgs};

const NA: f64 = f64::NAN;

pub struct RefTable {
    pub families: &'static [TestFamily],
    pub cases: &'static [RefCase],
    /// Published replicate count per cell.
    pub replicates: usize,
}

pub struct RefCase {
    pub case_id: u8,
    pub k_levels: Option<u8>,
    /// Per scheme: reference type-I error in percent at n = 200 and
    /// n = 500, family order matching `families`. NaN marks cells the
    /// method does not produce.
    pub rows: &'static [(&'static str, &'static [f64], &'static [f64])],
}

fn scheme_from_name(name: &str) -> SchemeSpec {
    match name {
        "biased-coin" => SchemeSpec::efron_biased_coin(2.0 / 3.0),
        "permuted-block" => SchemeSpec::permuted_block(4),
        "pocock-simon" => SchemeSpec::pocock_simon(2.0 / 3.0),
        "urn" => SchemeSpec::wei_urn(1.0, 1.0),
        "simple" => SchemeSpec::simple(),
        _ => unreachable!("unknown scheme row {name}"),
    }
}

const TABLE1_FAMILIES: &[TestFamily] = &[
    TestFamily::LogRank,
    TestFamily::BootstrapLogRank,
    TestFamily::CalibratedLogRank,
    TestFamily::Score,
    TestFamily::BootstrapScore,
    TestFamily::CalibratedScore,
];

const TABLE2_FAMILIES: &[TestFamily] = &[
    TestFamily::Model,
    TestFamily::LogRank,
    TestFamily::BootstrapLogRank,
    TestFamily::CalibratedLogRank,
    TestFamily::Score,
    TestFamily::BootstrapScore,
    TestFamily::CalibratedScore,
];

pub fn table1() -> RefTable {
    RefTable {
        families: TABLE1_FAMILIES,
        replicates: 10_000,
        cases: &[
            RefCase {
                case_id: 1,
                k_levels: None,
                rows: &[
                    ("biased-coin", &[2.2, 5.1, 5.0, 4.9, 5.0, 4.8], &[1.7, 4.8, 4.6, 4.7, 4.9, 4.6]),
                    ("permuted-block", &[2.0, 4.8, 4.7, 4.5, 4.6, 4.4], &[2.2, 5.4, 5.1, 5.2, 5.2, 5.1]),
                    ("pocock-simon", &[2.3, 5.1, NA, 5.0, 5.2, 4.9], &[1.9, 5.1, NA, 5.0, 5.0, 4.9]),
                    ("urn", &[3.0, 5.2, 4.8, 4.7, 5.0, 4.6], &[3.0, 5.0, 4.8, 4.7, 5.0, 4.7]),
                    ("simple", &[4.7, 5.0, 4.5, 4.9, 5.1, 4.9], &[4.6, 4.8, 4.5, 4.8, 4.9, 4.8]),
                ],
            },
            RefCase {
                case_id: 2,
                k_levels: None,
                rows: &[
                    ("biased-coin", &[1.9, 5.3, 5.8, 5.0, 5.2, 4.9], &[1.6, 5.0, 5.0, 4.9, 5.0, 4.8]),
                    ("permuted-block", &[1.7, 5.8, 5.4, 5.4, 5.5, 5.1], &[1.6, 5.2, 5.0, 5.1, 5.3, 5.0]),
                    ("pocock-simon", &[1.9, 5.3, NA, 5.0, 4.9, 4.8], &[1.6, 5.5, NA, 5.1, 5.0, 5.0]),
                    ("urn", &[2.7, 5.3, 5.0, 5.6, 5.7, 5.4], &[2.6, 5.2, 5.0, 5.3, 5.4, 5.2]),
                    ("simple", &[4.7, 4.9, 4.5, 4.3, 4.6, 4.3], &[5.0, 5.1, 5.0, 5.0, 5.3, 5.0]),
                ],
            },
            RefCase {
                case_id: 3,
                k_levels: Some(8),
                rows: &[
                    ("biased-coin", &[2.4, 5.2, 5.8, 4.8, 5.5, 4.7], &[2.4, 5.5, 5.8, 5.1, 5.4, 5.0]),
                    ("permuted-block", &[2.0, 6.2, 5.5, 5.4, 6.1, 5.3], &[1.7, 5.5, 5.2, 5.3, 5.8, 5.2]),
                    ("pocock-simon", &[2.4, 5.5, NA, 5.0, 5.4, 4.9], &[2.0, 5.1, NA, 4.8, 5.0, 4.8]),
                    ("urn", &[3.0, 5.4, 4.7, 5.1, 5.9, 4.6], &[2.8, 5.5, 4.9, 5.0, 5.3, 4.9]),
                    ("simple", &[5.0, 5.2, 4.8, 4.9, 5.2, 4.9], &[4.7, 5.0, 4.6, 4.7, 5.1, 4.7]),
                ],
            },
            RefCase {
                case_id: 3,
                k_levels: Some(4),
                rows: &[
                    ("biased-coin", &[2.5, 5.7, 6.0, 4.8, 5.2, 4.7], &[2.4, 5.6, 5.5, 4.7, 5.1, 4.6]),
                    ("permuted-block", &[2.2, 5.7, 5.3, 5.1, 5.6, 5.0], &[2.0, 5.1, 4.8, 4.6, 5.0, 4.5]),
                    ("pocock-simon", &[2.4, 5.7, NA, 5.3, 5.6, 5.2], &[2.3, 5.6, NA, 5.2, 5.5, 5.2]),
                    ("urn", &[3.7, 6.0, 5.6, 5.1, 5.4, 4.9], &[3.0, 5.3, 4.9, 4.6, 4.7, 4.5]),
                    ("simple", &[5.0, 5.2, 4.8, 4.9, 5.2, 4.9], &[4.7, 5.0, 4.6, 4.7, 5.1, 4.7]),
                ],
            },
            RefCase {
                case_id: 3,
                k_levels: Some(2),
                rows: &[
                    ("biased-coin", &[3.1, 5.4, 5.4, 5.2, 5.5, 5.1], &[2.5, 5.0, 4.7, 4.6, 4.7, 4.6]),
                    ("permuted-block", &[2.6, 5.0, 4.7, 4.6, 4.8, 4.5], &[2.6, 5.3, 4.9, 5.4, 5.5, 5.4]),
                    ("pocock-simon", &[2.8, 5.5, NA, 5.1, 5.3, 5.1], &[2.5, 5.2, NA, 5.1, 5.3, 5.1]),
                    ("urn", &[3.6, 5.4, 5.1, 5.0, 5.3, 4.9], &[3.4, 5.3, 5.0, 5.2, 5.5, 5.2]),
                    ("simple", &[5.0, 5.2, 4.8, 4.9, 5.2, 4.9], &[4.7, 5.0, 4.6, 4.7, 5.1, 4.7]),
                ],
            },
        ],
    }
}

pub fn table2() -> RefTable {
    RefTable {
        families: TABLE2_FAMILIES,
        replicates: 10_000,
        cases: &[
            RefCase {
                case_id: 4,
                k_levels: None,
                rows: &[
                    ("biased-coin", &[3.2, 2.0, 5.4, 5.5, 2.9, 5.0, 5.2], &[2.8, 1.8, 4.8, 4.8, 2.6, 4.8, 4.7]),
                    ("permuted-block", &[3.0, 1.8, 5.6, 5.1, 2.9, 5.2, 5.0], &[3.0, 1.7, 5.0, 5.1, 2.8, 5.2, 4.9]),
                    ("pocock-simon", &[5.6, 3.7, 5.6, NA, 5.1, 5.3, NA], &[5.8, 3.5, 5.5, NA, 5.6, 5.6, NA]),
                    ("urn", &[4.0, 2.7, 5.4, 4.9, 3.7, 5.3, 5.1], &[3.6, 2.9, 5.6, 5.3, 3.5, 5.3, 5.1]),
                    ("simple", &[5.3, 4.9, 5.0, 4.8, 4.6, 4.9, 4.6], &[5.1, 5.1, 5.0, 5.0, 4.8, 5.0, 4.8]),
                ],
            },
            RefCase {
                case_id: 5,
                k_levels: None,
                rows: &[
                    ("biased-coin", &[2.3, 2.3, 5.5, 5.8, 2.3, 5.2, 5.7], &[2.4, 2.3, 5.8, 5.8, 2.4, 5.8, 5.8]),
                    ("permuted-block", &[2.2, 2.2, 6.0, 5.5, 2.2, 5.7, 5.4], &[2.0, 1.9, 5.2, 5.0, 2.0, 5.3, 5.0]),
                    ("pocock-simon", &[2.5, 2.3, 5.3, NA, 2.4, 5.3, NA], &[2.0, 1.9, 5.0, NA, 2.0, 5.0, NA]),
                    ("urn", &[2.7, 2.6, 5.2, 4.8, 2.6, 5.1, 4.8], &[3.1, 2.9, 5.5, 5.3, 3.1, 5.5, 5.3]),
                    ("simple", &[4.7, 4.9, 4.9, 4.8, 4.6, 4.8, 4.6], &[4.9, 5.0, 5.2, 4.9, 4.8, 4.9, 4.8]),
                ],
            },
            RefCase {
                case_id: 6,
                k_levels: None,
                rows: &[
                    ("biased-coin", &[13.0, 0.3, 5.4, 6.9, 3.6, 5.0, 4.4], &[15.3, 0.2, 5.4, 5.8, 3.6, 5.0, 4.4]),
                    ("permuted-block", &[13.6, 0.1, 5.9, 5.7, 3.6, 5.2, 4.3], &[15.3, 0.1, 5.3, 5.1, 3.9, 5.5, 4.7]),
                    ("pocock-simon", &[13.7, 0.2, 5.0, NA, 3.5, 4.9, NA], &[14.8, 0.1, 5.1, NA, 3.9, 5.1, NA]),
                    ("urn", &[14.0, 0.9, 5.4, 5.1, 3.4, 4.5, 3.8], &[15.7, 1.0, 5.6, 5.4, 4.1, 5.1, 4.6]),
                    ("simple", &[14.6, 5.0, 5.2, 4.8, 4.1, 4.8, 4.1], &[15.6, 5.0, 5.2, 4.9, 4.2, 4.9, 4.2]),
                ],
            },
        ],
    }
}

/// Reference variance of the final within-stratum imbalance under the
/// marginal method with two balanced binary margins, strata in the order
/// (0,0), (0,1), (1,0), (1,1).
const IMBALANCE_NS: &[usize] = &[400, 800, 1200, 1600, 2000];
const IMBALANCE_REF: &[[f64; 4]] = &[
    [22.76, 25.25, 22.00, 25.24],
    [46.88, 47.56, 45.39, 47.15],
    [63.48, 66.16, 63.26, 65.79],
    [91.82, 91.75, 92.75, 94.56],
    [111.56, 111.74, 109.59, 111.43],
];
const IMBALANCE_REPLICATES: usize = 10_000;

pub fn reproduce_type1_table(
    table: &RefTable,
    args: &ReproduceArgs,
    threads: Option<usize>,
) -> Result<String, CliError> {
    let replicates = ((table.replicates as f64 * args.scale).round() as usize).max(100);
    let mut out = String::from("case,k,n,scheme");
    for family in table.families {
        out.push_str(&format!(
            ",{fam},{fam}_se,{fam}_ref",
            fam = family.label()
        ));
    }
    out.push_str(",flags\n");
    for case in table.cases {
        for (scheme_name, ref200, ref500) in case.rows {
            for (n, refs) in [(200usize, ref200), (500usize, ref500)] {
                eprintln!(
                    "reproduce: case {}{} scheme {scheme_name} n {n} ({replicates} replicates)",
                    case.case_id,
                    case.k_levels
                        .map(|k| format!(" (K={k})"))
                        .unwrap_or_default(),
                );
                let mut spec = CaseSpec::new(case.case_id, 0.0, n);
                if let Some(k) = case.k_levels {
                    spec.k_levels = k;
                }
                let mut config = SimConfig::new(spec, scheme_from_name(scheme_name));
                config.replicates = replicates;
                config.seed = args.seed;
                config.threads = threads;
                config.bootstrap = if args.bootstrap { Some(200) } else { None };
                let report = estimate_rejection(&config)?;
                out.push_str(&format!(
                    "{},{},{},{}",
                    case.case_id,
                    case.k_levels.map(|k| k.to_string()).unwrap_or_default(),
                    n,
                    scheme_name
                ));
                let mut flags = Vec::new();
                for (family, reference) in table.families.iter().zip(*refs) {
                    match report.row(0.0, *family) {
                        Some(row) => {
                            let rate = 100.0 * row.reject_rate;
                            let se = 100.0 * row.mc_se;
                            out.push_str(&format!(",{rate:.2},{se:.2}"));
                            if reference.is_nan() {
                                out.push_str(",-");
                            } else {
                                out.push_str(&format!(",{reference}"));
                                if (rate - reference).abs() > 4.0 * se {
                                    flags.push(family.label());
                                }
                            }
                        }
                        None => out.push_str(",-,-,-"),
                    }
                }
                out.push(',');
                out.push_str(&flags.join(";"));
                out.push('\n');
            }
        }
    }
    Ok(out)
}

pub fn reproduce_imbalance(
    args: &ReproduceArgs,
    threads: Option<usize>,
) -> Result<String, CliError> {
    let replicates = ((IMBALANCE_REPLICATES as f64 * args.scale).round() as usize).max(100);
    let scheme = SchemeSpec::pocock_simon(2.0 / 3.0);
    let law = CovariateLaw::Bernoulli(vec![0.5, 0.5]);
    let mut out = String::from(
        "n,var_00,var_01,var_10,var_11,ref_00,ref_01,ref_10,ref_11,\
         var_n_00,var_n_01,var_n_10,var_n_11,flags\n",
    );
    let run = |n: usize| monte_carlo_imbalance(&scheme, &law, n, replicates, args.seed);
    let results: Vec<_> = if let Some(t) = threads.filter(|&t| t > 0) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Other(e.to_string()))?;
        pool.install(|| IMBALANCE_NS.iter().map(|&n| run(n)).collect())
    } else {
        IMBALANCE_NS.iter().map(|&n| run(n)).collect()
    };
    for (row_index, (n, moments)) in IMBALANCE_NS.iter().zip(results).enumerate() {
        eprintln!("reproduce imbalance: n {n} ({replicates} replicates)");
        let moments = moments.map_err(|e| CliError::Other(e.to_string()))?;
        let rows: Vec<_> = moments.strata.values().collect();
        if rows.len() != 4 {
            return Err(CliError::Other(format!(
                "expected 4 strata, found {}",
                rows.len()
            )));
        }
        let mut flags = Vec::new();
        let labels = ["00", "01", "10", "11"];
        out.push_str(&n.to_string());
        for row in &rows {
            out.push_str(&format!(",{:.2}", row.var_d));
        }
        for (slot, (row, label)) in rows.iter().zip(labels).enumerate() {
            let reference = IMBALANCE_REF[row_index][slot];
            out.push_str(&format!(",{reference}"));
            if (row.var_d - reference).abs() > 4.0 * row.var_d_se {
                flags.push(label);
            }
        }
        for row in &rows {
            out.push_str(&format!(",{:.4}", row.var_d_over_n));
        }
        out.push(',');
        out.push_str(&flags.join(";"));
        out.push('\n');
    }
    Ok(out)
}
