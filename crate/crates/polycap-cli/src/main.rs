//! Command line for the convex-cap solver.
//!
//! Exit codes: 0 on success, 1 on domain errors (invalid metric, failed
//! convergence, threshold violations), 2 on usage errors.

use clap::{Parser, Subcommand};
use polycap::solver::Method;
use polycap::{Classification, Scalar, SolveOptions, SolveStatus};
use rand::SeedableRng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polycap", version, about = "Convex caps from polyhedral disk metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a disk file and print its convexity report.
    Validate { disk: PathBuf },
    /// Maximize the total scalar curvature and write the cap file.
    Solve {
        disk: PathBuf,
        /// Output cap file.
        #[arg(short, long)]
        output: PathBuf,
        /// KKT residual tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// newton or gradient.
        #[arg(long, default_value = "newton")]
        method: String,
        #[arg(long)]
        verbose: bool,
    },
    /// Develop a solved cap into coordinates and export a Wavefront OBJ.
    Embed {
        cap: PathBuf,
        #[arg(long)]
        disk: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the Hessian eigenvalue summary, Γ components and rigidity.
    Rigidity {
        cap: PathBuf,
        #[arg(long)]
        disk: PathBuf,
    },
    /// Compare the analytic gradient and Hessian with central differences.
    CheckDerivatives {
        disk: PathBuf,
        /// JSON object {vertex-id: height}.
        #[arg(long)]
        heights: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Generate random caps, re-solve their metrics, report the height error.
    Roundtrip {
        /// Points per cap.
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Validate { disk } => validate(&disk),
        Command::Solve {
            disk,
            output,
            tol,
            max_iter,
            method,
            verbose,
        } => solve(&disk, &output, tol, max_iter, &method, verbose),
        Command::Embed { cap, disk, output } => embed(&cap, &disk, &output),
        Command::Rigidity { cap, disk } => rigidity(&cap, &disk),
        Command::CheckDerivatives { disk, heights, eps } => check(&disk, &heights, eps),
        Command::Roundtrip { n, seed, trials } => roundtrip(n, seed, trials),
    }
}

fn validate(path: &PathBuf) -> Result<(), String> {
    let disk = polycap::load_disk::<Scalar>(path).map_err(|e| e.to_string())?;
    let report = disk.validate_convexity();
    println!("vertices={} triangles={}", disk.n_vertices(), disk.triangulation().n_triangles());
    for a in &report.angles {
        println!(
            "vertex id={} {} cone_angle={:.12} defect={:.12}",
            a.id,
            if a.boundary { "boundary" } else { "interior" },
            a.cone_angle,
            a.defect
        );
    }
    if report.is_convex() {
        println!("convex=yes");
        Ok(())
    } else {
        for v in &report.violations {
            println!(
                "violation id={} angle={:.12} limit={:.12}",
                v.id, v.cone_angle, v.limit
            );
        }
        Err(format!(
            "metric is not convex: vertex id={} has angle {:.12} above its limit",
            report.violations[0].id, report.violations[0].cone_angle
        ))
    }
}

fn solve(
    disk_path: &PathBuf,
    out: &PathBuf,
    tol: f64,
    max_iter: usize,
    method: &str,
    verbose: bool,
) -> Result<(), String> {
    let disk = polycap::load_disk::<Scalar>(disk_path).map_err(|e| e.to_string())?;
    let method = match method {
        "newton" => Method::Newton,
        "gradient" => Method::Gradient,
        other => return Err(format!("unknown method {other:?} (use newton or gradient)")),
    };
    let opts = SolveOptions {
        tolerance: tol,
        max_iterations: max_iter,
        method,
        verbose,
        ..SolveOptions::default()
    };
    let result = polycap::maximize(&disk, &opts).map_err(|e| e.to_string())?;
    polycap::save_cap(&disk, &result.cap, result.s_value, out).map_err(|e| e.to_string())?;
    let status = match result.status {
        SolveStatus::InteriorOptimum => "InteriorOptimum",
        SolveStatus::BoundaryOptimum => "BoundaryOptimum",
        SolveStatus::MaxIterations => "MaxIterations",
    };
    println!(
        "status={status} S={:.12} kkt={:.3e} iterations={} active={}",
        result.s_value,
        result.kkt_residual,
        result.iterations,
        result.active.len()
    );
    let max_kappa = result
        .cap
        .interior_vertices()
        .map(|v| result.cap.kappa()[v].abs())
        .fold(0.0, f64::max);
    println!("max|kappa|={max_kappa:.3e}");
    match &result.classification {
        Classification::ClassicalCap3D { degenerate_prisms } => {
            println!("classification=ClassicalCap3D degenerate_prisms={degenerate_prisms}")
        }
        Classification::ClassicalCapFlat2D => println!("classification=ClassicalCapFlat2D"),
        Classification::NotClassical(why) => println!("classification=NotClassical({why})"),
    }
    for v in result.cap.interior_vertices() {
        println!(
            "vertex id={} h={:.12} kappa={:.12}",
            disk.id_of(v),
            result.cap.heights()[v],
            result.cap.kappa()[v]
        );
    }
    if result.status == SolveStatus::MaxIterations {
        return Err("solver stopped at the iteration budget".into());
    }
    Ok(())
}

fn classification_of(cap: &polycap::Cap64, tol: Scalar) -> Classification {
    polycap::classify(cap, tol)
}

fn embed(cap_path: &PathBuf, disk_path: &PathBuf, out: &PathBuf) -> Result<(), String> {
    let disk = polycap::load_disk::<Scalar>(disk_path).map_err(|e| e.to_string())?;
    let cap = polycap::load_cap(cap_path, &disk).map_err(|e| e.to_string())?;
    let active = polycap::solver::active_set(&cap);
    let resid = polycap::kkt_residual(&cap, &active);
    let classification = classification_of(&cap, resid.max(1e-8));
    let emb = polycap::develop(&cap, &classification).map_err(|e| e.to_string())?;
    polycap::export_obj(&emb, out).map_err(|e| e.to_string())?;
    let report = polycap::verify_isometry(&emb, &cap, &disk);
    println!(
        "vertices={} extra_base={} upper_faces={} wall_faces={} flat2d={}",
        emb.vertices.len(),
        emb.extra.len(),
        emb.upper_faces.len(),
        emb.wall_faces.len(),
        emb.flat2d
    );
    println!(
        "max_edge_rel_err={:.3e} max_cone_angle_err={:.3e} max_link_err={:.3e}",
        report.max_edge_rel_err, report.max_cone_angle_err, report.max_link_err
    );
    Ok(())
}

fn rigidity(cap_path: &PathBuf, disk_path: &PathBuf) -> Result<(), String> {
    let disk = polycap::load_disk::<Scalar>(disk_path).map_err(|e| e.to_string())?;
    let cap = polycap::load_cap(cap_path, &disk).map_err(|e| e.to_string())?;
    let report = polycap::rigidity_report(&cap);
    println!(
        "gamma_components={} interior_components={} rigid={}",
        report.gamma_components,
        report.interior_components,
        if report.rigid { "yes" } else { "no" }
    );
    println!(
        "nullspace_dim={} nullspace_residual={:.3e} wall_restricted={}",
        report.nullspace_dim, report.nullspace_residual, report.wall_restricted
    );
    match (report.eigenvalues.first(), report.eigenvalues.last()) {
        (Some(lo), Some(hi)) => println!(
            "hessian_dim={} eig_min={:.6e} eig_max={:.6e} eig_max_scaled={:.6e}",
            report.eigenvalues.len(),
            lo,
            hi,
            report.eig_max_scaled.unwrap_or(0.0)
        ),
        _ => println!("hessian_dim=0"),
    }
    Ok(())
}

fn check(disk_path: &PathBuf, heights_path: &PathBuf, eps: f64) -> Result<(), String> {
    let disk = polycap::load_disk::<Scalar>(disk_path).map_err(|e| e.to_string())?;
    let h = polycap::load_heights(heights_path, &disk).map_err(|e| e.to_string())?;
    let check = polycap::check_derivatives(&disk, &h, eps).map_err(|e| e.to_string())?;
    println!("gradient (kappa vs central difference of S, eps={eps:.1e}):");
    for (v, kappa, fd) in &check.gradient {
        println!(
            "  id={} kappa={:.12} fd={:.12} err={:.3e}",
            disk.id_of(*v),
            kappa,
            fd,
            (kappa - fd).abs()
        );
    }
    println!("hessian (a_ij vs central difference of kappa):");
    for (i, j, a, fd) in &check.hessian {
        println!(
            "  id_i={} id_j={} analytic={:.12} fd={:.12} err={:.3e}",
            disk.id_of(*i),
            disk.id_of(*j),
            a,
            fd,
            (a - fd).abs()
        );
    }
    println!(
        "max_gradient_err={:.3e} max_hessian_err={:.3e}",
        check.max_gradient_err, check.max_hessian_err
    );
    Ok(())
}

fn roundtrip(n: usize, seed: u64, trials: usize) -> Result<(), String> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut max_height_err: f64 = 0.0;
    let mut max_edge_err: f64 = 0.0;
    for trial in 0..trials {
        let gen = polycap::hull::random_cap_retry::<Scalar>(n, &mut rng, 10_000);
        let opts = SolveOptions {
            tolerance: 1e-10,
            ..SolveOptions::default()
        };
        let result = polycap::maximize(&gen.disk, &opts)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        let mut err: f64 = 0.0;
        for v in gen.disk.interior_vertices() {
            let truth = gen.heights[v];
            err = err.max((result.cap.heights()[v] - truth).abs() / truth.abs().max(1e-9));
        }
        max_height_err = max_height_err.max(err);
        let emb = polycap::develop(&result.cap, &result.classification)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        let report = polycap::verify_isometry(&emb, &result.cap, &gen.disk);
        max_edge_err = max_edge_err.max(report.max_edge_rel_err);
        println!(
            "trial={trial} vertices={} height_err={:.3e} edge_err={:.3e}",
            gen.disk.n_vertices(),
            err,
            report.max_edge_rel_err
        );
    }
    println!("max_height_err={max_height_err:.3e} max_edge_err={max_edge_err:.3e}");
    if max_height_err > 1e-6 {
        return Err(format!("max_height_err {max_height_err:.3e} above 1e-6"));
    }
    Ok(())
}
