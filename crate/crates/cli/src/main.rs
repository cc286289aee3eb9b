use std::path::PathBuf;
use std::process::ExitCode;

use amra_cli::canon::{fmt_g17, to_canonical, to_canonical_string};
use amra_cli::files::{parse_reals, parse_shears, parse_shears_3d, read_bank, read_plan, write_bank, write_plan};
use amra_cli::grid::{write_grid_function, write_signal};
use amra_cli::pgm::Pgm;
use amra_cli::pyramid_dir::{read_pyramid, write_pyramid, InputRaster};
use amra_cli::{exit_status, Refusal};
use amra_core::amra::{fad, far, validate_plan};
use amra_core::analysis::{cascade, sum_rule_order};
use amra_core::bankgen::{seed_bank, shearlet_bank_2d, shearlet_bank_3d, tensor_bank, SeedName};
use amra_core::mask::tensor;
use amra_core::rotapprox::{best_unimodular, best_unimodular_bruteforce};
use amra_core::uep::{check_uep_general, DEFAULT_TOL};
use amra_core::{Band, FilterBank, IntMatrix, Mask, TreePlan};
use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "amra", version, about = "Adaptive multiresolution filter banks and tree transforms")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Shearlet2d,
    Shearlet3d,
    Tensor,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify a bank; exit 0 iff it reconstructs perfectly.
    CheckUep {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Build a certified bank.
    DesignBank {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Comma-separated shears for shearlet2d.
        #[arg(long, allow_hyphen_values = true)]
        shears: Option<String>,
        /// Semicolon-separated pairs for shearlet3d, e.g. "(0,0);(1,1)".
        #[arg(long, allow_hyphen_values = true)]
        shears3d: Option<String>,
        #[arg(long, default_value = "haar")]
        seed: SeedName,
        /// Dimension of a tensor bank.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Scalar dilation of a tensor bank.
        #[arg(long, default_value_t = 2)]
        dilation: i64,
        /// Relabel: comma-separated indices of the low-pass filters.
        #[arg(long)]
        low: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build a plan from one shearlet bank per level.
    DesignPlan {
        /// One entry per level; 2-D shears like "0,1", or 3-D pairs like "(0,0);(1,0)".
        #[arg(long = "level", required = true, allow_hyphen_values = true)]
        levels: Vec<String>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value = "haar")]
        seed: SeedName,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Certify every bank a plan uses.
    ValidatePlan {
        #[arg(long)]
        plan: PathBuf,
    },
    /// Decompose a P5 image into a coefficient directory.
    Decompose {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Rebuild the signal from a coefficient directory.
    Reconstruct {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        pyramid: PathBuf,
        /// Raw `.f64` with a `.json` sidecar, or a P5 image with `--crop-to-input`.
        #[arg(short, long)]
        output: PathBuf,
        /// Crop to the decomposed raster and quantize to the input's maxval.
        #[arg(long)]
        crop_to_input: bool,
    },
    /// Determinant-one integer matrices closest to a rotation.
    RotationApprox {
        /// Radians, or degrees with a `deg` suffix.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long)]
        brute_force: bool,
        #[arg(long, default_value_t = 3)]
        radius: i64,
    },
    /// Sum-rule order of a low-pass mask.
    SumRules {
        /// Comma-separated real coefficients of a 1-D mask.
        #[arg(long, allow_hyphen_values = true)]
        mask: String,
        #[arg(long, default_value_t = 2)]
        dilation: i64,
        /// Index of the first coefficient.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        offset: i64,
        /// Tensor power of the mask, with dilation `dilation · I`.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Cascade samples of a refinable function.
    Cascade {
        #[arg(long, conflicts_with = "mask")]
        seed: Option<SeedName>,
        #[arg(long, allow_hyphen_values = true)]
        mask: Option<String>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        offset: i64,
        #[arg(long, default_value_t = 2)]
        dilation: i64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        levels: usize,
        /// Raw `.f64` output; the sidecar goes next to it as `.json`.
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::CheckUep { bank, tol } => {
            let bank = read_bank(&bank)?;
            let report = check_uep_general(&bank, tol)?;
            print!("{}", to_canonical(&report)?);
            if !report.certified {
                eprintln!("refuted: worst violation {}", fmt_g17(report.worst_violation));
            }
            Ok(if report.certified { 0 } else { 1 })
        }
        Cmd::DesignBank { kind, shears, shears3d, seed, dim, dilation, low, output } => {
            let mut bank = match kind {
                Kind::Shearlet2d => {
                    let s = shears.context("--kind shearlet2d needs --shears")?;
                    shearlet_bank_2d(&parse_shears(&s)?, seed)?
                }
                Kind::Shearlet3d => {
                    let s = shears3d.context("--kind shearlet3d needs --shears3d")?;
                    shearlet_bank_3d(&parse_shears_3d(&s)?, seed)?
                }
                Kind::Tensor => tensor_bank(dim, dilation, seed)?,
            };
            if let Some(low) = low {
                let idx: Vec<usize> =
                    low.split(',').map(|t| t.trim().parse().with_context(|| format!("bad index `{t}`"))).collect::<Result<_>>()?;
                bank = bank.relabel(&idx)?;
            }
            certify(&bank)?;
            write_bank(&output, &bank)?;
            eprintln!("wrote {} filters to {}", bank.len(), output.display());
            Ok(0)
        }
        Cmd::DesignPlan { levels, dim, seed, output } => {
            let banks = levels
                .iter()
                .map(|l| match dim {
                    2 => Ok(shearlet_bank_2d(&parse_shears(l)?, seed)?),
                    3 => Ok(shearlet_bank_3d(&parse_shears_3d(l)?, seed)?),
                    d => bail!("shearlet plans are 2-D or 3-D, not {d}-D"),
                })
                .collect::<Result<Vec<FilterBank>>>()?;
            let plan = TreePlan::new(dim, banks)?;
            certify_plan(&plan)?;
            write_plan(&output, &plan)?;
            Ok(0)
        }
        Cmd::ValidatePlan { plan } => {
            let plan = read_plan(&plan)?;
            let report = validate_plan(&plan)?;
            let nodes: serde_json::Map<String, serde_json::Value> =
                report.nodes.iter().map(|(n, r)| Ok((n.encode(plan.depth()), serde_json::to_value(r)?))).collect::<Result<_>>()?;
            let doc = serde_json::json!({
                "certified": report.certified,
                "worst_violation": report.worst_violation,
                "digest": plan.digest(),
                "nodes": nodes,
            });
            print!("{}", to_canonical_string(&doc));
            Ok(if report.certified { 0 } else { 1 })
        }
        Cmd::Decompose { plan, input, output } => {
            let plan = read_plan(&plan)?;
            ensure!(plan.dim() == 2, "images need a 2-D plan, got {}-D", plan.dim());
            certify_plan(&plan)?;
            let img = Pgm::read(&input)?;
            let v = img.to_signal();
            let p = fad(&plan, &v)?;
            let raster = InputRaster { offset: v.offset().to_vec(), shape: v.shape().to_vec(), maxval: Some(img.maxval) };
            write_pyramid(&output, &plan, &p, Some(raster))?;
            eprintln!("wrote {} leaves to {}", p.low.len() + p.high.len(), output.display());
            Ok(0)
        }
        Cmd::Reconstruct { plan, pyramid, output, crop_to_input } => {
            let plan = read_plan(&plan)?;
            let (p, manifest) = read_pyramid(&pyramid, &plan)?;
            let v = far(&plan, &p)?;
            if crop_to_input {
                let input = manifest.input.ok_or_else(|| Refusal("manifest records no input raster to crop to".into()))?;
                let maxval = input.maxval.ok_or_else(|| Refusal("manifest records no input maxval".into()))?;
                if input.shape.len() != 2 || input.offset != [0, 0] {
                    return Err(Refusal(format!("input raster {:?} at {:?} is not an image", input.shape, input.offset)).into());
                }
                let img = Pgm::from_signal(&v, input.shape[1], input.shape[0], maxval);
                amra_cli::files::write_atomic(&output, &img.to_bytes())?;
            } else {
                write_signal(&output, &v)?;
            }
            Ok(0)
        }
        Cmd::RotationApprox { theta, brute_force, radius } => {
            let t = parse_angle(&theta)?;
            let sol = if brute_force { best_unimodular_bruteforce(t, radius)? } else { best_unimodular(t) };
            print!("{}", to_canonical(&sol)?);
            Ok(0)
        }
        Cmd::SumRules { mask, dilation, offset, dim, tol } => {
            let (a, m0) = tensor_mask(&mask, offset, dilation, dim)?;
            let tau = sum_rule_order(&a, &m0, tol)?;
            print!("{}", to_canonical_string(&serde_json::json!({ "tau": tau })));
            Ok(0)
        }
        Cmd::Cascade { seed, mask, offset, dilation, dim, levels, output } => {
            let (a, m0) = match (seed, mask) {
                (Some(s), None) => {
                    let low = seed_bank(s, dilation)?.filters[0].clone();
                    let m0 = IntMatrix::scalar(dim, dilation);
                    (tensor(&vec![low; dim])?, m0)
                }
                (None, Some(m)) => tensor_mask(&m, offset, dilation, dim)?,
                _ => bail!("give exactly one of --seed and --mask"),
            };
            let g = cascade(&a, &m0, levels)?;
            write_grid_function(&output, &g)?;
            Ok(0)
        }
    }
}

fn certify(bank: &FilterBank) -> Result<()> {
    let report = check_uep_general(bank, DEFAULT_TOL)?;
    if !report.certified {
        return Err(Refusal(format!("bank is not certified (worst violation {})", fmt_g17(report.worst_violation))).into());
    }
    Ok(())
}

fn certify_plan(plan: &TreePlan) -> Result<()> {
    let report = validate_plan(plan)?;
    if !report.certified {
        let nodes: Vec<String> = report.refuted_nodes().iter().map(|n| n.encode(plan.depth())).collect();
        return Err(Refusal(format!("plan has uncertified banks at {}", nodes.join(", "))).into());
    }
    Ok(())
}

fn tensor_mask(csv: &str, offset: i64, dilation: i64, dim: usize) -> Result<(Mask, IntMatrix)> {
    ensure!(dim >= 1, "--dim must be positive");
    let h = Mask::from_real_1d(offset, &parse_reals(csv)?, Band::Low);
    Ok((tensor(&vec![h; dim])?, IntMatrix::scalar(dim, dilation)))
}

/// Radians, or degrees with a `deg` suffix.
fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim();
    let (num, scale) = match t.strip_suffix("deg") {
        Some(d) => (d.trim(), std::f64::consts::PI / 180.0),
        None => (t, 1.0),
    };
    let x: f64 = num.parse().with_context(|| format!("bad angle `{s}`"))?;
    ensure!(x.is_finite(), "angle must be finite");
    Ok(x * scale)
}
