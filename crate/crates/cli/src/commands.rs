use std::path::Path;

use gausscov::table::{format_pvalue, format_real, write_matrix, Table};
use gausscov::{
    averaged_fit, bidiagonal_graph_sim, gen_interactions, neighborhood_graph, pval_subsets,
    pval_subsets_augmented, repeated_stepwise, simulate_false_positives, stepwise, tutorial_sim,
    ColMatrix, Dataset, EdgeRule, GraphConfig, PostSelectionConfig, PvalueConfig, RepeatLimits,
    SelectionStep, SimConfig, TutorialVariant,
};
use serde::Serialize;

use crate::report::{aligned, records};
use crate::{
    EdgeRuleArg, Failure, Format, GraphArgs, InteractArgs, PvalsArgs, SelectAllArgs, SelectArgs,
    SimulateCommand,
};

type Out = Result<String, Failure>;

fn read_table(path: &Path) -> Result<Table, Failure> {
    Table::read(path).map_err(|error| Failure::Input {
        path: path.display().to_string(),
        error,
    })
}

fn load(path: &Path, response: Option<&str>) -> Result<(Dataset, bool), Failure> {
    let table = read_table(path)?;
    let data = table.dataset(response)?;
    Ok((data, table.header().is_some()))
}

// 1-based user indices to 0-based, checked against `k`.
fn zero_based(ind: &[usize], k: usize, what: &str) -> Result<Vec<usize>, Failure> {
    ind.iter()
        .map(|&i| {
            if (1..=k).contains(&i) {
                Ok(i - 1)
            } else {
                Err(Failure::Usage(format!("{what} {i} out of range 1..={k}")))
            }
        })
        .collect()
}

fn pvalue_config(a: &SelectArgs, n: usize) -> PvalueConfig {
    let mut cfg = PvalueConfig::new(a.alpha, a.kmax.unwrap_or(n.saturating_sub(2).max(1)))
        .with_nu(a.nu)
        .with_misclass(a.misclass)
        .with_centered(!a.no_intercept);
    if let Some(ek) = a.ek {
        cfg = cfg.with_ek(ek);
    }
    cfg
}

#[derive(Serialize)]
struct StepRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<usize>,
    index: usize,
    pvalue: f64,
    rss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    misclass: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
}

fn step_records<'a>(
    steps: impl Iterator<Item = (Option<usize>, &'a SelectionStep)>,
    data: &'a Dataset,
    named: bool,
) -> Vec<StepRecord<'a>> {
    steps
        .map(|(group, s)| StepRecord {
            group,
            index: s.index + 1,
            pvalue: s.pvalue,
            rss: s.rss,
            misclass: s.misclass,
            name: named.then(|| data.labels()[s.index].as_str()),
        })
        .collect()
}

fn step_table(recs: &[StepRecord], grouped: bool, misclass: bool, named: bool) -> String {
    let mut header = Vec::new();
    if grouped {
        header.push("group");
    }
    header.extend(["index", "pvalue", "rss"]);
    if misclass {
        header.push("misclass");
    }
    if named {
        header.push("name");
    }
    let rows: Vec<Vec<String>> = recs
        .iter()
        .map(|r| {
            let mut row = Vec::new();
            if let Some(g) = r.group {
                row.push(g.to_string());
            }
            row.push(r.index.to_string());
            row.push(format_pvalue(r.pvalue));
            row.push(format_real(r.rss));
            if misclass {
                row.push(r.misclass.map_or("NA".into(), |m| m.to_string()));
            }
            if let Some(name) = r.name {
                row.push(name.to_string());
            }
            row
        })
        .collect();
    aligned(&header, &rows)
}

pub fn select(a: &SelectArgs, format: Format) -> Out {
    let (data, named) = load(&a.data.input, a.data.response.as_deref())?;
    let cfg = pvalue_config(a, data.n());
    let path = stepwise(&data, &cfg)?;
    let recs = step_records(path.steps.iter().map(|s| (None, s)), &data, named);
    Ok(match format {
        Format::Text => step_table(&recs, false, a.misclass, named),
        Format::Records => records(&recs),
    })
}

#[derive(Serialize)]
struct FittedRecord<'a> {
    fitted: &'a [f64],
}

pub fn select_all(a: &SelectAllArgs, format: Format) -> Out {
    let s = &a.select;
    let (data, named) = load(&s.data.input, s.data.response.as_deref())?;
    let cfg = pvalue_config(s, data.n());
    let limits = RepeatLimits {
        nmax: a.nmax,
        vmax: a.vmax,
    };
    let groups = repeated_stepwise(&data, &cfg, limits)?;
    let steps = groups
        .groups
        .iter()
        .flat_map(|g| g.steps.iter().map(move |st| (Some(g.id), st)));
    let recs = step_records(steps, &data, named);
    let fitted = if a.fitted && !groups.groups.is_empty() {
        Some(averaged_fit(&data, &groups)?)
    } else {
        None
    };
    Ok(match format {
        Format::Text => {
            let mut out = step_table(&recs, true, s.misclass, named);
            if let Some(f) = fitted {
                out.push_str("\nfitted\n");
                for v in f {
                    out.push_str(&format!("{v}\n"));
                }
            }
            out
        }
        Format::Records => {
            let mut out = records(&recs);
            if let Some(f) = fitted {
                out.push_str(&records(&[FittedRecord { fitted: &f }]));
            }
            out
        }
    })
}

#[derive(Serialize)]
struct CompanionRecord {
    index: usize,
    flagged: bool,
}

#[derive(Serialize)]
struct PvalRecord<'a> {
    index: usize,
    pvalue: f64,
    companions: Vec<CompanionRecord>,
    rss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    misclass: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
}

pub fn pvals(a: &PvalsArgs, format: Format) -> Out {
    let (data, named) = load(&a.data.input, a.data.response.as_deref())?;
    let ind = zero_based(&a.ind, data.k(), "covariate")?;
    let cfg = PostSelectionConfig {
        k: a.k,
        misclass: a.misclass,
        ..PostSelectionConfig::new(a.alpha, a.alpha1)
    };
    let results = if a.augmented {
        pval_subsets_augmented(&data, &ind, &cfg)?
    } else {
        pval_subsets(&data, &ind, &cfg)?
    };
    let recs: Vec<PvalRecord> = results
        .iter()
        .map(|r| PvalRecord {
            index: r.index + 1,
            pvalue: r.pvalue,
            companions: r
                .companions
                .iter()
                .map(|c| CompanionRecord {
                    index: c.index + 1,
                    flagged: c.flagged,
                })
                .collect(),
            rss: r.rss,
            misclass: r.misclass,
            name: named.then(|| data.labels()[r.index].as_str()),
        })
        .collect();
    if format == Format::Records {
        return Ok(records(&recs));
    }
    let width = recs.iter().map(|r| r.companions.len()).max().unwrap_or(0).max(2);
    let labels: Vec<String> = (2..width + 2).map(|i| format!("i{i}")).collect();
    let mut header = vec!["index", "pvalue"];
    header.extend(labels.iter().map(String::as_str));
    header.push("rss");
    if a.misclass {
        header.push("misclass");
    }
    if named {
        header.push("name");
    }
    let rows: Vec<Vec<String>> = recs
        .iter()
        .map(|r| {
            let mut row = vec![r.index.to_string(), format_pvalue(r.pvalue)];
            for c in 0..width {
                row.push(match r.companions.get(c) {
                    Some(c) if c.flagged => format!("{}*", c.index),
                    Some(c) => c.index.to_string(),
                    None => "-".into(),
                });
            }
            row.push(format_real(r.rss));
            if a.misclass {
                row.push(r.misclass.map_or("NA".into(), |m| m.to_string()));
            }
            if let Some(name) = r.name {
                row.push(name.to_string());
            }
            row
        })
        .collect();
    Ok(aligned(&header, &rows))
}

#[derive(Serialize)]
struct InteractRecord<'a> {
    columns: usize,
    with_constant: usize,
    output: &'a str,
    decode: &'a str,
}

pub fn interact(a: &InteractArgs, format: Format) -> Out {
    let table = read_table(&a.input)?;
    let response = a.response.as_deref().map(|r| table.column_index(r)).transpose()?;
    let base: Vec<usize> = (0..table.ncols()).filter(|&j| Some(j) != response).collect();
    if base.is_empty() {
        return Err(gausscov::Error::Data("no columns to expand".into()).into());
    }
    let cols: Vec<Vec<f64>> = base.iter().map(|&j| table.column(j).to_vec()).collect();
    let (expanded, monomials) = gen_interactions(&ColMatrix::from_columns(&cols)?, a.ord)?;
    let name_of = |j: usize| match table.header() {
        Some(h) => h[j].clone(),
        None => format!("x{}", j + 1),
    };
    let labels: Vec<String> = base.iter().map(|&j| name_of(j)).collect();
    let mut header = (0..monomials.len())
        .map(|c| monomials.name(c, &labels))
        .collect::<gausscov::Result<Vec<_>>>()?;
    let matrix = match response {
        Some(r) => {
            header.push(match table.header() {
                Some(h) => h[r].clone(),
                None => "y".into(),
            });
            let mut data = expanded.as_slice().to_vec();
            data.extend_from_slice(table.column(r));
            ColMatrix::from_col_major(expanded.nrows(), expanded.ncols() + 1, data)?
        }
        None => expanded,
    };
    let decode_path = format!("{}.decode", a.output.display());
    let write = |path: &Path, text: String| {
        std::fs::write(path, text).map_err(|e| Failure::Lib(gausscov::Error::Io(e)))
    };
    write(&a.output, write_matrix(&matrix, Some(&header)))?;
    write(Path::new(&decode_path), monomials.to_text())?;

    let count = monomials.len();
    let k = base.len();
    let output = a.output.display().to_string();
    Ok(match format {
        Format::Records => records(&[InteractRecord {
            columns: count,
            with_constant: count + 1,
            output: &output,
            decode: &decode_path,
        }]),
        Format::Text => format!(
            "columns {count}\n\
             C({k} + {ord}, {ord}) = {total} monomials of degree at most {ord}; \
             the constant is not generated, leaving {count}\n\
             wrote {output}\nwrote {decode_path}\n",
            ord = a.ord,
            total = count + 1,
        ),
    })
}

#[derive(Serialize)]
struct EdgeRecord {
    i: usize,
    j: usize,
    p_ij: Option<f64>,
    p_ji: Option<f64>,
}

pub fn graph(a: &GraphArgs, format: Format) -> Out {
    let table = read_table(&a.input)?;
    let x = table.matrix()?;
    let nodes = a
        .nodes
        .as_deref()
        .map(|n| zero_based(n, x.ncols(), "node"))
        .transpose()?;
    let cfg = GraphConfig {
        nu: a.nu,
        repeated: a.repeated,
        bonferroni: !a.no_bonferroni,
        edge_rule: match a.edge_rule {
            EdgeRuleArg::Or => EdgeRule::Or,
            EdgeRuleArg::And => EdgeRule::And,
        },
        kmax: a.kmax,
        nmax: a.nmax,
        ..GraphConfig::new(a.alpha)
    };
    let edges = neighborhood_graph(&x, &cfg, nodes.as_deref())?;
    let body = match format {
        Format::Text => edges.to_text(),
        Format::Records => records(
            &edges
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    i: e.i + 1,
                    j: e.j + 1,
                    p_ij: e.p_ij,
                    p_ji: e.p_ji,
                })
                .collect::<Vec<_>>(),
        ),
    };
    match &a.output {
        Some(path) => {
            std::fs::write(path, edges.to_text()).map_err(|e| Failure::Lib(e.into()))?;
            Ok(match format {
                Format::Text => format!("edges {}\nwrote {}\n", edges.len(), path.display()),
                Format::Records => body,
            })
        }
        None => Ok(body),
    }
}

#[derive(Serialize)]
struct TutorialRecord {
    fp: f64,
    #[serde(rename = "fn")]
    fn_: f64,
    nsim: usize,
}

#[derive(Serialize)]
struct GraphSimRecord {
    false_positives: usize,
    false_negatives: usize,
    edges: usize,
}

pub fn simulate(cmd: &SimulateCommand, format: Format) -> Out {
    match cmd {
        SimulateCommand::Fp(a) => {
            let cfg = SimConfig::noise(a.n, a.k, a.alpha, a.nu, a.kmx, a.nsim).with_seed(a.seed);
            let t = simulate_false_positives(&cfg)?;
            Ok(match format {
                Format::Text => t.to_text(),
                Format::Records => records(&[t]),
            })
        }
        SimulateCommand::Tutorial(a) => {
            let variant = TutorialVariant::try_from(a.variant)
                .map_err(|_| Failure::Usage(format!("--variant must be 1 or 2, got {}", a.variant)))?;
            let cfg = SimConfig::tutorial(a.n, a.k, a.s, a.amplitude, a.alpha, a.nu, a.nsim)
                .with_seed(a.seed);
            let r = tutorial_sim(variant, &cfg)?;
            Ok(match format {
                Format::Text => format!("{:>8}{:>8}\n{:>8.2}{:>8.2}\n", "fp", "fn", r.fp_mean, r.fn_mean),
                Format::Records => records(&[TutorialRecord {
                    fp: r.fp_mean,
                    fn_: r.fn_mean,
                    nsim: r.nsim,
                }]),
            })
        }
        SimulateCommand::Graph(a) => {
            let r = bidiagonal_graph_sim(a.n, a.k, a.rho, a.alpha, a.seed)?;
            Ok(match format {
                Format::Text => format!(
                    "false_positives {}\nfalse_negatives {}\nedges {}\n",
                    r.false_positives,
                    r.false_negatives,
                    r.edges.len()
                ),
                Format::Records => records(&[GraphSimRecord {
                    false_positives: r.false_positives,
                    false_negatives: r.false_negatives,
                    edges: r.edges.len(),
                }]),
            })
        }
    }
}
