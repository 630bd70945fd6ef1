use std::collections::BTreeMap;

use forestlab_core::analysis::{
    bush_joins, component_graph, fit_envelope, origin_profile, ray_decompose_with,
    recurrence_diagnostic, tail_sum, EnvelopePoint, RecurrenceOptions,
};
use forestlab_core::graph::{
    counterexample_graph, read_edge_list, Budget, Graph, LatticeBox, LatticeBoxSpec, Topology,
    DEFAULT_VERTEX_BUDGET,
};
use forestlab_core::resample::{
    ball_vertices, exact_conditional_test, statistical_resample_test, StatisticalOptions,
};
use forestlab_core::resistance::{effective_resistance, wired_effective_resistance};
use forestlab_core::rng::{par_replicas_with, RngStream};
use forestlab_core::stats::{mean_estimate, proportion};
use forestlab_core::walk::{cut_time_batch, kac_check, z_values, MarkovChain};
use forestlab_core::wilson::{write_forest, WilsonSampler};
use serde::Serialize;

use crate::config::{Chain, Experiment, ExperimentConfig};
use crate::output::{num, Output};
use crate::CliError;

pub fn run(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let mut out = Output::new(cfg.out.as_deref().expect("default output directory"))?;
    let ctx = Ctx {
        cfg,
        stream: RngStream::new(cfg.seed.unwrap_or(0), 0),
        budget: Budget {
            vertices: cfg.budget_vertices.unwrap_or(DEFAULT_VERTEX_BUDGET),
        },
    };
    match cfg.experiment() {
        Experiment::Sample => sample(&ctx, &mut out)?,
        Experiment::Resistance => resistance(&ctx, &mut out)?,
        Experiment::ResampleTest => resample(&ctx, &mut out)?,
        Experiment::Cuttime => cuttime(&ctx, &mut out)?,
        Experiment::Njl => njl(&ctx, &mut out)?,
        Experiment::Growth => growth(&ctx, &mut out)?,
        Experiment::Recurrence => recurrence(&ctx, &mut out)?,
        Experiment::Counterexample => counterexample(&ctx, &mut out)?,
        Experiment::Kac => kac(&ctx, &mut out)?,
    }
    out.finish(cfg)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    stream: RngStream,
    budget: Budget,
}

impl Ctx<'_> {
    fn d(&self) -> usize {
        self.cfg.d.expect("default dimension")
    }

    fn radius(&self) -> usize {
        self.cfg.radius.expect("default radius")
    }

    fn wired_box(&self) -> Result<LatticeBox, CliError> {
        Ok(LatticeBox::new(
            LatticeBoxSpec::wired(self.d(), self.radius()),
            &self.budget,
        )?)
    }
}

fn sample(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let lb = ctx.wired_box()?;
    let replicas = ctx.cfg.replicas.expect("default replicas");
    let mut sampler = WilsonSampler::new(lb.vertex_count());
    let mut rows = Vec::new();
    let width = replicas.to_string().len();
    for i in 0..replicas {
        let mut rng = ctx.stream.substream(i).rng();
        let forest = sampler.sample_wsf(&lb, &mut rng)?;
        let mut dump = Vec::new();
        write_forest(&forest, &mut dump)?;
        out.write(&format!("forests/forest_{i:0width$}.txt"), &dump)?;
        let comp = forest.components();
        let o = lb.origin();
        rows.push(vec![
            i.to_string(),
            lb.box_size().to_string(),
            comp.count().to_string(),
            forest.edge_count().to_string(),
            comp.members(comp.label(o).expect("origin in forest"))
                .len()
                .to_string(),
            (forest.path_to_root(o).len() - 1).to_string(),
        ]);
    }
    out.csv(
        "forests.csv",
        &[
            "replica",
            "vertices",
            "components",
            "edges",
            "origin_component_size",
            "origin_ray_length",
        ],
        &rows,
    )
}

fn resistance(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    if let Some(path) = &cfg.graph {
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::config("graph", format!("{}: {e}", path.display())))?;
        let g = read_edge_list(std::io::BufReader::new(file))?;
        let (a, b) = (
            cfg.a.clone().unwrap_or_default(),
            cfg.b.clone().unwrap_or_default(),
        );
        let r = effective_resistance(&g, &a, &b)?;
        #[derive(Serialize)]
        struct Report {
            vertices: usize,
            edges: usize,
            a: Vec<usize>,
            b: Vec<usize>,
            resistance: f64,
        }
        return out.json(
            "resistance.json",
            &Report {
                vertices: g.vertex_count(),
                edges: g.edge_count(),
                a,
                b,
                resistance: r,
            },
        );
    }
    let radii = cfg.radii.clone().expect("default radii");
    let x = cfg.x.clone().expect("default x");
    let y = cfg.y.clone().expect("default y");
    let seq = wired_effective_resistance(ctx.d(), &radii, &x, &y, &ctx.budget)?;
    let rows: Vec<Vec<String>> = seq
        .iter()
        .map(|&(r, v)| vec![r.to_string(), num(v)])
        .collect();
    out.csv("resistance.csv", &["radius", "resistance"], &rows)
}

fn resample(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let ball = cfg.ball.expect("default ball");
    if cfg.exact == Some(true) {
        let lb = ctx.wired_box()?;
        let g = lb.to_graph()?;
        let report = exact_conditional_test(&g, &ball_vertices(&lb, ball))?;
        if !report.passes() {
            out.notes.push("some K-group has unequal counts".into());
        }
        return out.json("exact_report.json", &report);
    }
    let opts = StatisticalOptions {
        alpha: cfg.alpha.unwrap_or(1e-3),
        budget: ctx.budget,
        ..Default::default()
    };
    let spec = LatticeBoxSpec::wired(ctx.d(), ctx.radius());
    let report = statistical_resample_test(
        spec,
        ball,
        cfg.replicas.expect("default replicas"),
        &ctx.stream,
        &opts,
    )?;
    if report.coarsened {
        out.notes
            .push("cells too sparse: verdict from edge marginals".into());
    }
    let cells: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            let edges: Vec<String> = c.edges.iter().map(|e| e.to_string()).collect();
            vec![
                edges.join(" "),
                c.direct.to_string(),
                c.resampled.to_string(),
            ]
        })
        .collect();
    out.csv(
        "resample_cells.csv",
        &["edges", "direct", "resampled"],
        &cells,
    )?;
    let marginals: Vec<Vec<String>> = report
        .marginals
        .iter()
        .map(|m| {
            vec![
                m.edge.to_string(),
                num(m.direct),
                num(m.resampled),
                num(m.z),
            ]
        })
        .collect();
    out.csv(
        "resample_marginals.csv",
        &["edge", "direct", "resampled", "z"],
        &marginals,
    )?;
    #[derive(Serialize)]
    struct Summary<'a> {
        passes: bool,
        #[serde(flatten)]
        report: &'a forestlab_core::resample::StatisticalReport,
    }
    out.json(
        "resample_report.json",
        &Summary {
            passes: report.passes(),
            report: &report,
        },
    )
}

fn cuttime(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let ns = cfg.ns.clone().expect("default ns");
    let batch = cut_time_batch(
        ctx.d(),
        &ns,
        cfg.horizon.expect("default horizon"),
        cfg.samples.expect("default samples"),
        &ctx.stream,
        cfg.censor_threshold.expect("default threshold"),
    )?;
    out.censoring_rate = Some(batch.censoring_rate);
    if let Some(w) = &batch.warning {
        out.notes.push(w.clone());
    }
    // Z_1, Z_2 are finite only from d = 7 on; below that no bound is reported
    let z = if ctx.d() >= 7 {
        Some(z_values(
            ctx.d(),
            cfg.z_truncation.expect("default truncation"),
        )?)
    } else {
        None
    };
    let rows: Vec<Vec<String>> = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let (t, l) = (batch.mean_t[i], batch.mean_l[i]);
            let (bt, bl) = match z {
                Some(z) => {
                    let b = z.z1.upper() * n as f64 + z.z2.upper();
                    (num(b), num(b + 1.0))
                }
                None => (String::new(), String::new()),
            };
            vec![
                n.to_string(),
                num(t.mean),
                num(t.half_width),
                num(l.mean),
                num(l.half_width),
                bt,
                bl,
            ]
        })
        .collect();
    out.csv(
        "cuttime.csv",
        &[
            "n",
            "mean_t",
            "half_width_t",
            "mean_l",
            "half_width_l",
            "bound_t",
            "bound_l",
        ],
        &rows,
    )?;
    #[derive(Serialize)]
    struct Report<'a> {
        batch: &'a forestlab_core::walk::CutTimeBatch,
        z: Option<forestlab_core::walk::ZValues>,
    }
    out.json("cuttime.json", &Report { batch: &batch, z })
}

fn njl(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let lb = ctx.wired_box()?;
    let ns = cfg.ns.clone().expect("default ns");
    let ms = cfg.ms.clone().expect("default ms");
    let drop = cfg.ray_drop.expect("default drop");
    let replicas = cfg.replicas.expect("default replicas");
    let per: Vec<Result<(usize, Vec<u64>), CliError>> = par_replicas_with(
        replicas,
        &ctx.stream,
        || WilsonSampler::new(lb.vertex_count()),
        |sampler, _, rng| {
            let forest = sampler.sample_wsf(&lb, rng)?;
            let d = ray_decompose_with(&forest, lb.origin(), drop)?;
            let joins = bush_joins(&lb, &d);
            let sums = ns
                .iter()
                .flat_map(|&n| ms.iter().map(move |&m| (n, m)))
                .map(|(n, m)| tail_sum(&joins, n, m))
                .collect();
            Ok((d.truncation, sums))
        },
    );
    let per: Vec<(usize, Vec<u64>)> = per.into_iter().collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| ms.iter().map(move |&m| (n, m)))
        .collect();
    let max_reach = ns.iter().max().unwrap() + ms.iter().max().unwrap();
    let short = per.iter().filter(|(t, _)| *t < max_reach).count();
    out.clipping_rate = Some(short as f64 / replicas as f64);
    let mut rows = Vec::new();
    for (i, (t, sums)) in per.iter().enumerate() {
        for (k, &(n, m)) in pairs.iter().enumerate() {
            rows.push(vec![
                i.to_string(),
                n.to_string(),
                m.to_string(),
                sums[k].to_string(),
                t.to_string(),
            ]);
        }
    }
    out.csv(
        "njl.csv",
        &["replica", "n", "m", "tail_sum", "ray_truncation"],
        &rows,
    )?;
    let points: Vec<EnvelopePoint> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(n, m))| {
            let xs: Vec<f64> = per.iter().map(|(_, s)| s[k] as f64).collect();
            let est = mean_estimate(&xs);
            EnvelopePoint {
                n,
                m,
                mean: est.mean,
                std_err: est.std_err,
            }
        })
        .collect();
    // per-replica monotonicity in m (set inclusion makes violations impossible)
    let violations = per
        .iter()
        .map(|(_, s)| {
            (0..ns.len())
                .map(|a| {
                    let row = &s[a * ms.len()..(a + 1) * ms.len()];
                    let mut idx: Vec<usize> = (0..ms.len()).collect();
                    idx.sort_by_key(|&j| ms[j]);
                    idx.windows(2).filter(|w| row[w[1]] > row[w[0]]).count()
                })
                .sum::<usize>()
        })
        .sum::<usize>();
    let fit = fit_envelope(&points);
    if let Err(e) = &fit {
        out.notes.push(format!("no envelope fit: {e}"));
    }
    #[derive(Serialize)]
    struct Summary {
        replicas: u64,
        points: Vec<EnvelopePoint>,
        monotonicity_violations: usize,
        fit: Option<forestlab_core::analysis::EnvelopeFit>,
        trend_nonnegative: Option<bool>,
    }
    let fit = fit.ok();
    out.json(
        "njl_summary.json",
        &Summary {
            replicas,
            points,
            monotonicity_violations: violations,
            trend_nonnegative: fit
                .as_ref()
                .map(|f| f.trend_nonnegative(forestlab_core::stats::Z_999)),
            fit,
        },
    )
}

fn growth(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let lb = ctx.wired_box()?;
    let replicas = ctx.cfg.replicas.expect("default replicas");
    let drop = ctx.cfg.ray_drop.expect("default drop");
    let per: Vec<Result<Vec<forestlab_core::analysis::GrowthRow>, CliError>> = par_replicas_with(
        replicas,
        &ctx.stream,
        || WilsonSampler::new(lb.vertex_count()),
        |sampler, _, rng| {
            let forest = sampler.sample_wsf(&lb, rng)?;
            let rows = if drop == forestlab_core::analysis::DEFAULT_RAY_DROP {
                origin_profile(&lb, &forest, lb.origin())?.1
            } else {
                let d = ray_decompose_with(&forest, lb.origin(), drop)?;
                forestlab_core::analysis::resistance_growth_profile(&lb, &d, d.truncation)?
            };
            Ok(rows)
        },
    );
    let per: Vec<Vec<_>> = per.into_iter().collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut violations = 0usize;
    for (i, profile) in per.iter().enumerate() {
        for r in profile {
            rows.push(vec![
                i.to_string(),
                r.n.to_string(),
                num(r.resistance),
                num(r.lower_bound),
            ]);
            by_n.entry(r.n).or_default().push(r.resistance / r.n as f64);
            let tol = 1e-9 * r.n as f64;
            if r.lower_bound > r.resistance + tol || r.resistance > r.n as f64 + tol {
                violations += 1;
            }
        }
    }
    out.csv(
        "growth.csv",
        &["replica", "n", "resistance", "lower_bound"],
        &rows,
    )?;
    #[derive(Serialize)]
    struct Slope {
        n: usize,
        replicas: usize,
        mean_ratio: f64,
        half_width: f64,
    }
    let slopes: Vec<Slope> = by_n
        .iter()
        .map(|(&n, xs)| {
            let e = mean_estimate(xs);
            Slope {
                n,
                replicas: xs.len(),
                mean_ratio: e.mean,
                half_width: e.half_width,
            }
        })
        .collect();
    #[derive(Serialize)]
    struct Summary {
        replicas: u64,
        sandwich_violations: usize,
        resistance_over_n: Vec<Slope>,
    }
    out.json(
        "growth_summary.json",
        &Summary {
            replicas,
            sandwich_violations: violations,
            resistance_over_n: slopes,
        },
    )
}

fn recurrence(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let radii = ctx.cfg.radii.clone().expect("default radii");
    let opts = RecurrenceOptions {
        budget: ctx.budget,
        ray_drop: ctx.cfg.ray_drop.expect("default drop"),
    };
    let rows = recurrence_diagnostic(ctx.d(), &radii, &opts, &ctx.stream)?;
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.radius.to_string(),
                num(r.resistance),
                r.component_size.to_string(),
                r.boundary_vertices.to_string(),
                r.ray_length.to_string(),
                num(*r.inverse_cut_sums.last().unwrap_or(&0.0)),
            ]
        })
        .collect();
    out.csv(
        "recurrence.csv",
        &[
            "radius",
            "resistance",
            "component_size",
            "boundary_vertices",
            "ray_length",
            "inverse_cut_sum",
        ],
        &csv,
    )?;
    out.json("recurrence.json", &rows)
}

fn counterexample(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let cx = counterexample_graph(ctx.radius(), &ctx.budget)?;
    // identify the two wired vertices (copy 1's is the last id)
    let keep = cx.graph.vertex_count() - 1;
    debug_assert_eq!(cx.wired[1], keep);
    let edges: Vec<(usize, usize)> = cx
        .graph
        .edges()
        .map(|(u, v)| {
            let f = |x: usize| if x == cx.wired[1] { cx.wired[0] } else { x };
            (f(u), f(v))
        })
        .collect();
    let merged = Graph::from_edges(keep, &edges, Some(cx.wired[0]))?;
    let [o1, o2] = cx.origins;
    let wired_resistance = effective_resistance(&merged, &[o1], &[o2])?;
    let separate_resistance = effective_resistance(&cx.graph, &[o1], &[o2])?;
    let replicas = ctx.cfg.replicas.expect("default replicas");
    let per: Vec<Result<(bool, f64), CliError>> = par_replicas_with(
        replicas,
        &ctx.stream,
        || WilsonSampler::new(merged.vertex_count()),
        |sampler, _, rng| {
            let forest = sampler.sample_wsf(&merged, rng)?;
            let inside = forest.contains_edge(cx.bridge);
            let comp = forest.components();
            let label = comp.label(o1).expect("origin in forest");
            let cg = component_graph(&merged, comp.members(label));
            let r = match cg.local.get(&o2) {
                Some(&b) => effective_resistance(&cg.graph, &[cg.local[&o1]], &[b])?,
                None => f64::INFINITY,
            };
            Ok((inside, r))
        },
    );
    let per: Vec<(bool, f64)> = per.into_iter().collect::<Result<_, _>>()?;
    let hits = per.iter().filter(|p| p.0).count() as u64;
    let freq = proportion(hits, replicas);
    let finite: Vec<f64> = per.iter().filter(|p| p.0).map(|p| p.1).collect();
    #[derive(Serialize)]
    struct Report {
        radius: usize,
        vertices: usize,
        edges: usize,
        wired_resistance: f64,
        separate_wired_resistance: f64,
        bridge_frequency: forestlab_core::stats::MeanEstimate,
        kirchhoff_consistent: bool,
        induced_bridge_resistance: Option<forestlab_core::stats::MeanEstimate>,
    }
    out.json(
        "counterexample.json",
        &Report {
            radius: ctx.radius(),
            vertices: merged.vertex_count(),
            edges: merged.edge_count(),
            wired_resistance,
            separate_wired_resistance: separate_resistance,
            kirchhoff_consistent: (freq.mean - wired_resistance).abs() <= freq.half_width,
            bridge_frequency: freq,
            induced_bridge_resistance: (!finite.is_empty()).then(|| mean_estimate(&finite)),
        },
    )
}

fn kac(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let chain = match ctx.cfg.chain.expect("default chain") {
        Chain::ThreeCycle => MarkovChain::rotation(3),
        Chain::TwoState => MarkovChain::symmetric_two_state(),
    };
    let report = kac_check(
        &chain,
        &[0],
        ctx.cfg.samples.expect("default samples"),
        &ctx.stream,
    )?;
    #[derive(Serialize)]
    struct Summary<'a> {
        chain: Chain,
        consistent: bool,
        #[serde(flatten)]
        report: &'a forestlab_core::walk::KacReport,
    }
    out.json(
        "kac.json",
        &Summary {
            chain: ctx.cfg.chain.unwrap(),
            consistent: report.consistent(),
            report: &report,
        },
    )
}
