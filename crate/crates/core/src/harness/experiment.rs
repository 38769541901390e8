//! Runs the configured solvers and writes their maps, reports and manifests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{error, info};
use serde::{Deserialize, Serialize};

use crate::classical::{run_fd, run_fd_truncated, run_mc};
use crate::error::{Error, Result};
use crate::geometry::{DetectorRegion, Problem};
use crate::rng::RngStream;
use crate::statevector::BasisMask;
use crate::strategies::{
    coherent_walk_state, run_measured_walk, swap_test_score, AmplifiedResult,
    AmplifiedWalk, FluxMap, GroverK, Normalization, SwapTestResult,
};

use super::config::{ExperimentConfig, Solver};
use super::metrics::{compare_maps, compare_vectors, extract_slice, Axis, Slice};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub solver: Solver,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runtime_s: f64,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub a: Solver,
    pub b: Solver,
    pub cosine: f64,
    pub tv: f64,
    pub slice_cosine: f64,
    pub slice_tv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub solver: Solver,
    pub slice: Slice,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub solvers: Vec<SolverRecord>,
    pub pairs: Vec<PairMetrics>,
    pub slices: Vec<SliceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplified: Option<AmplifiedResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap_score: Option<SwapTestResult>,
}

impl ComparisonReport {
    pub fn pair(&self, a: Solver, b: Solver) -> Option<&PairMetrics> {
        self.pairs
            .iter()
            .find(|p| (p.a, p.b) == (a, b) || (p.a, p.b) == (b, a))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    files: Vec<String>,
    failed: Vec<&'a str>,
}

#[derive(Serialize)]
struct PlotSeries {
    label: String,
    csv: String,
    slice_index: usize,
}

#[derive(Serialize)]
struct PlotManifest {
    axis: Axis,
    coordinate: f64,
    cell_size: f64,
    series: Vec<PlotSeries>,
}

enum SolverOutput {
    Flux(FluxMap),
    Amplified(AmplifiedResult),
    Swap(SwapTestResult),
}

fn stream_for(config: &ExperimentConfig, solver: Solver) -> Result<RngStream> {
    let seed = config
        .seed_for(solver)
        .ok_or_else(|| Error::Config(format!("solver `{solver}` needs a seed")))?;
    Ok(RngStream::with_stream(seed, solver.stream()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Position distribution of the amplified state restricted to zero coin
/// ancillas.
fn amplified_positions(
    problem: &Problem,
    steps: usize,
    k: GroverK,
    detector: &DetectorRegion,
) -> Result<(AmplifiedResult, FluxMap)> {
    let walk = AmplifiedWalk::build(&problem.geometry, &problem.source, steps, detector)?;
    let (result, state) = walk.amplify(k, steps)?;
    let regs = walk.registers();
    let mask = regs
        .iter()
        .fold(BasisMask::default(), |m, r| m.with(r.coin_ancilla, false));
    let mut probs = vec![0.0; problem.geometry.n_cells()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        if mask.matches(i) {
            probs[regs[0].cell_of(i)] += a.norm_sqr();
        }
    }
    let g = &problem.geometry;
    let map = FluxMap::new(g.n_x(), g.n_y(), probs, 0, Normalization::PerShot)?.to_unit_sum()?;
    Ok((result, map))
}

fn region_or(cells: &Option<Vec<[usize; 2]>>, fallback: &DetectorRegion) -> Result<DetectorRegion> {
    match cells {
        Some(cells) => DetectorRegion::new(cells.iter().map(|c| (c[0], c[1]))),
        None => Ok(fallback.clone()),
    }
}

fn run_solver(config: &ExperimentConfig, problem: &Problem, solver: Solver, out: &Path) -> Result<(SolverOutput, Vec<PathBuf>)> {
    let (g, src) = (&problem.geometry, &problem.source);
    let csv = out.join(format!("{solver}.csv"));
    Ok(match solver {
        Solver::Mc => {
            let r = run_mc(g, src, &config.mc.options(), &stream_for(config, solver)?)?;
            info!("mc: {} collisions, {} capped", r.collisions, r.capped);
            r.flux.write_csv(&csv)?;
            (SolverOutput::Flux(r.flux), vec![csv])
        }
        Solver::Fd => {
            let flux = match config.fd.iterations {
                Some(n) => run_fd_truncated(g, src, n)?,
                None => run_fd(g, src, &config.fd.options())?,
            };
            flux.write_csv(&csv)?;
            (SolverOutput::Flux(flux), vec![csv])
        }
        Solver::WalkMeasured => {
            let mut rng = stream_for(config, solver)?;
            let report = run_measured_walk(g, src, &config.walk_measured.options(), &mut rng)?;
            let json = out.join(format!("{solver}.json"));
            report.flux.write_csv(&csv)?;
            std::fs::write(&json, report.to_json()? + "\n")?;
            (SolverOutput::Flux(report.flux), vec![csv, json])
        }
        Solver::WalkAmplified => {
            let detector = region_or(&config.walk_amplified.detector, &problem.detector)?;
            detector.validate(g)?;
            let (result, map) =
                amplified_positions(problem, config.walk_amplified.steps, config.walk_amplified.k, &detector)?;
            let json = out.join(format!("{solver}.json"));
            map.write_csv(&csv)?;
            write_json(&json, &result)?;
            (SolverOutput::Amplified(result), vec![csv, json])
        }
        Solver::SwapScore => {
            let region = region_or(&config.swap_score.region, &problem.detector)?;
            region.validate(g)?;
            let (state, regs) = coherent_walk_state(g, src, config.swap_score.steps)?;
            let mut rng = stream_for(config, solver)?;
            let r = swap_test_score(&state, &regs, &region, config.swap_score.shots, &mut rng)?;
            let json = out.join(format!("{solver}.json"));
            write_json(&json, &r)?;
            (SolverOutput::Swap(r), vec![json])
        }
    })
}

fn display(base: &Path, p: &Path) -> String {
    p.strip_prefix(base).unwrap_or(p).display().to_string()
}

/// Runs every selected solver in order and writes, under the output
/// directory: one file set per solver, `report.json`, `manifest.json` and
/// `plot_manifest.json`. A failing solver does not stop the others; the
/// outputs are still written and `Error::SolversFailed` is returned.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<ComparisonReport> {
    config.validate()?;
    let problem = config.problem(base_dir)?;
    let out = base_dir.join(&config.output_dir);
    std::fs::create_dir_all(&out)?;

    let g = &problem.geometry;
    let axis = config.slice.axis;
    let (ext_x, ext_y) = g.extent();
    let coordinate = config.slice.coordinate.unwrap_or(match axis {
        Axis::X => ext_x / 2.0,
        Axis::Y => ext_y / 2.0,
    });

    let mut report = ComparisonReport::default();
    let mut maps: Vec<(Solver, FluxMap)> = Vec::new();
    let mut files = Vec::new();
    let mut plot = Vec::new();
    for &solver in &config.solvers {
        let start = Instant::now();
        let result = run_solver(config, &problem, solver, &out);
        let runtime_s = start.elapsed().as_secs_f64();
        let mut record = SolverRecord {
            solver,
            ok: result.is_ok(),
            error: None,
            runtime_s,
            outputs: Vec::new(),
        };
        match result {
            Ok((output, paths)) => {
                record.outputs = paths.iter().map(|p| display(&out, p)).collect();
                files.extend(record.outputs.iter().cloned());
                match output {
                    SolverOutput::Flux(map) => {
                        let slice = extract_slice(&map, g.cell_size(), axis, coordinate)?;
                        plot.push(PlotSeries {
                            label: solver.to_string(),
                            csv: format!("{solver}.csv"),
                            slice_index: slice.index,
                        });
                        report.slices.push(SliceRecord { solver, slice });
                        maps.push((solver, map));
                    }
                    SolverOutput::Amplified(r) => report.amplified = Some(r),
                    SolverOutput::Swap(r) => report.swap_score = Some(r),
                }
                info!("{solver} finished in {runtime_s:.2} s");
            }
            Err(e) => {
                error!("{solver} failed: {e}");
                record.error = Some(e.to_string());
            }
        }
        report.solvers.push(record);
    }

    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            let (a, b) = (&maps[i], &maps[j]);
            let m = compare_maps(&a.1, &b.1)?;
            let sa = &report.slices[i].slice.values;
            let sb = &report.slices[j].slice.values;
            let s = compare_vectors(sa, sb)?;
            report.pairs.push(PairMetrics {
                a: a.0,
                b: b.0,
                cosine: m.cosine,
                tv: m.tv,
                slice_cosine: s.cosine,
                slice_tv: s.tv,
            });
        }
    }

    write_json(&out.join("report.json"), &report)?;
    write_json(
        &out.join("plot_manifest.json"),
        &PlotManifest {
            axis,
            coordinate,
            cell_size: g.cell_size(),
            series: plot,
        },
    )?;
    let failed: Vec<&str> = report
        .solvers
        .iter()
        .filter(|r| !r.ok)
        .map(|r| r.solver.name())
        .collect();
    files.push("report.json".into());
    files.push("plot_manifest.json".into());
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            files,
            failed: failed.clone(),
        },
    )?;
    if !failed.is_empty() {
        return Err(Error::SolversFailed(failed.iter().map(|s| s.to_string()).collect()));
    }
    Ok(report)
}
