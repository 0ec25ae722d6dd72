use anyhow::{bail, Context, Result};
use magspec::analysis::{
    check_clusters, check_free_half_ring, check_numerical_range, check_upper_bound, cross_validate,
    sector_report, Band, SectorSpec, Verdict,
};
use magspec::birman_schwinger::BirmanSchwinger;
use magspec::landau::Branch;
use magspec::oracle::{dense_eigenvalues, dense_hamiltonian, resolvable_im_k, Annulus};
use magspec::potentials::{check_assumptions, effective_w, EffectiveW};
use magspec::toeplitz::{
    cluster_radii, toeplitz_spectrum_radial, toeplitz_spectrum_to_floor, Regime,
};
use magspec::zero_finder::{eigenvalues_near_level, EigenvalueRecord};
use serde::Serialize;

use crate::config::Config;
use crate::output::{float, OutDir};

fn level_or(cfg: &Config, level: Option<usize>) -> usize {
    level.or_else(|| cfg.scan.map(|s| s.level)).unwrap_or(0)
}

fn default_radii() -> Vec<f64> {
    (5..=20).map(|j| (-(j as f64)).exp()).collect()
}

pub fn toeplitz(cfg: &Config, level: Option<usize>, out: &OutDir) -> Result<()> {
    let q = level_or(cfg, level);
    let b = cfg.magnetic.b;
    let w = effective_w(&cfg.potential()?)?;
    let spec = toeplitz_spectrum_radial(q, b, &w, cfg.toeplitz.m_max)?;
    let rows: Vec<Vec<String>> = spec
        .entries
        .iter()
        .map(|e| vec![e.m.to_string(), float(e.mu)])
        .collect();
    out.csv("toeplitz.csv", &["m", "mu"], &rows)?;
    let radii = if cfg.toeplitz.radii.is_empty() {
        default_radii()
    } else {
        cfg.toeplitz.radii.clone()
    };
    let rows: Vec<Vec<String>> = radii
        .iter()
        .map(|&r| {
            vec![
                float(r),
                spec.counting(r).to_string(),
                spec.resolves(r).to_string(),
            ]
        })
        .collect();
    out.csv("counting.csv", &["r", "count", "resolved"], &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct AsymptoticRow {
    r: f64,
    count: usize,
    comparator: f64,
    ratio: f64,
}

pub fn asymptotics(cfg: &Config, level: Option<usize>, out: &OutDir) -> Result<()> {
    let q = level_or(cfg, level);
    let b = cfg.magnetic.b;
    let w: EffectiveW = effective_w(&cfg.potential()?)?;
    let radii = if cfg.toeplitz.radii.is_empty() {
        default_radii()
    } else {
        cfg.toeplitz.radii.clone()
    };
    let floor = radii.iter().copied().fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        bail!("no radii to tabulate");
    }
    let spec = toeplitz_spectrum_to_floor(q, b, &w, 0.5 * floor)?;
    let regime = Regime::of_effective(&w, b);
    let mut rows = Vec::new();
    for &r in &radii {
        let count = spec.counting(r);
        let comparator = regime.comparator(r, b)?;
        rows.push(AsymptoticRow {
            r,
            count,
            comparator,
            ratio: count as f64 / comparator,
        });
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                float(r.r),
                r.count.to_string(),
                float(r.comparator),
                float(r.ratio),
            ]
        })
        .collect();
    out.csv(
        "asymptotics.csv",
        &["r", "count", "comparator", "ratio"],
        &cells,
    )?;
    out.json(
        "asymptotics.json",
        &serde_json::json!({ "regime": regime, "rows": rows }),
    )?;
    Ok(())
}

fn sector_spec(cfg: &Config, q: usize, theta: f64) -> Result<SectorSpec> {
    Ok(SectorSpec::new(
        cfg.potential.alpha,
        theta,
        cfg.branch()?,
        q,
        cfg.magnetic.b,
    )?)
}

fn determinant_scan(cfg: &Config, q: usize) -> Result<Vec<EigenvalueRecord>> {
    let pot = cfg.potential()?;
    if pot.epsilon == 0.0 {
        return Ok(Vec::new());
    }
    let bs = BirmanSchwinger::new(&pot, cfg.field()?, cfg.basis(q)?)?;
    log::info!("truncation tail estimate {:.3e}", bs.tail_estimate());
    Ok(eigenvalues_near_level(
        &bs,
        cfg.scan()?.region,
        cfg.scan_options()?,
    )?)
}

pub fn scan(cfg: &Config, level: Option<usize>, out: &OutDir) -> Result<()> {
    let q = level_or(cfg, level);
    let eigs = determinant_scan(cfg, q)?;
    out.eigenvalues("eigenvalues.csv", &eigs)?;
    let spec = sector_spec(cfg, q, cfg.scan()?.theta)?;
    let bands: Vec<Band> = match &cfg.verify {
        Some(v) => v
            .r_ladder
            .iter()
            .map(|&r| Band {
                q,
                b: cfg.magnetic.b,
                a1: r * r,
                a2: 4.0 * r * r,
                nu: v.nu_im_cutoff * 2.0 * r * r,
                branch: spec.branch,
            })
            .collect(),
        None => Vec::new(),
    };
    out.json("sector_report.json", &sector_report(&eigs, &spec, &bands)?)?;
    Ok(())
}

pub fn oracle(cfg: &Config, level: Option<usize>, out: &OutDir) -> Result<()> {
    let q = level_or(cfg, level);
    let region = cfg.scan()?.region;
    let (lo, hi) = region.modulus_range();
    let window = Annulus {
        level: q,
        inner: lo * lo,
        outer: hi * hi,
        upper: cfg.branch()? == Branch::Plus,
    };
    let model = dense_hamiltonian(&cfg.potential()?, cfg.field()?, cfg.oracle_basis(q)?)?;
    let eigs = dense_eigenvalues(&model, &window, cfg.stability()?)?;
    out.eigenvalues("oracle.csv", &eigs)?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    level: usize,
    seed: u64,
    verdicts: Vec<Verdict>,
    upper_bound: Option<magspec::analysis::UpperBoundVerdict>,
    clusters: Option<magspec::analysis::ClusterVerdict>,
    cross_validation: Option<magspec::analysis::CrossValidation>,
    warnings: Vec<String>,
    pass: bool,
}

/// Runs every check the configuration allows; returns whether all passed.
pub fn verify(cfg: &Config, level: Option<usize>, out: &OutDir) -> Result<bool> {
    let q = level_or(cfg, level);
    let v = cfg.verify()?.clone();
    let pot = cfg.potential()?;
    let field = cfg.field()?;
    let b = field.b;
    let branch = cfg.branch()?;
    let spec = SectorSpec::new(pot.alpha, v.theta, branch, q, b)?;
    let mut warnings = Vec::new();
    let assumptions = check_assumptions(&pot)?;
    if v.warn_weak_hypotheses && magspec::potentials::transverse_mass(&pot.transverse).is_err() {
        warnings.push("F is not integrable: only the hypotheses without F in L^1 hold".to_string());
    }
    if !assumptions.phase.holds {
        warnings.push(format!(
            "phase assumption fails: {}",
            assumptions.phase.detail
        ));
    }

    let eigs = determinant_scan(cfg, q).context("scanning the determinant")?;
    out.eigenvalues("eigenvalues.csv", &eigs)?;
    let mut verdicts = vec![check_numerical_range(&eigs, &pot, 1e-8)];

    // Direction of the semi-axis relative to the scanned half-plane.
    let axis_in_half_plane = spec.axis().sin() * branch.sign() > 0.0;
    let clusters = if axis_in_half_plane && assumptions.gaussian_decay.holds {
        let unit = effective_w(&pot.with_epsilon(1.0))?;
        let unit_spec = toeplitz_spectrum_to_floor(q, b, &unit, 1e-3 * v.eta / pot.epsilon)?;
        let ladder = cluster_radii(&unit_spec, v.nu_gap)?;
        Some(check_clusters(
            &eigs,
            &ladder,
            &unit_spec,
            pot.epsilon,
            &spec,
            v.eta,
            v.clusters,
        )?)
    } else {
        None
    };
    if !axis_in_half_plane {
        verdicts.push(check_free_half_ring(&eigs, q, b, v.eta, branch));
    }

    let upper_bound = if v.r_ladder.is_empty() {
        None
    } else {
        let w = effective_w(&pot)?;
        let floor = v.r_ladder.iter().copied().fold(f64::INFINITY, f64::min);
        let tspec = toeplitz_spectrum_to_floor(q, b, &w, 0.5 * floor)?;
        let mut rung_eigs = Vec::new();
        if pot.epsilon != 0.0 {
            let bs = BirmanSchwinger::new(&pot, field, cfg.basis(q)?)?;
            for &r in &v.r_ladder {
                let band = Band {
                    q,
                    b,
                    a1: r * r,
                    a2: 4.0 * r * r,
                    nu: 0.0,
                    branch,
                };
                rung_eigs.extend(eigenvalues_near_level(
                    &bs,
                    band.k_region(1e-3)?,
                    cfg.scan_options()?,
                )?);
            }
        }
        Some(check_upper_bound(
            &rung_eigs,
            &tspec,
            &v.r_ladder,
            v.nu_im_cutoff,
            branch,
            v.ratio_factor,
        )?)
    };

    let cross_validation = match &cfg.oracle {
        Some(o) => {
            let region = cfg.scan()?.region;
            let (lo, hi) = region.modulus_range();
            let window = Annulus {
                level: q,
                inner: lo * lo,
                outer: hi * hi,
                upper: branch == Branch::Plus,
            };
            let oracle_basis = cfg.oracle_basis(q)?;
            let model = dense_hamiltonian(&pot, field, oracle_basis)?;
            let oracle = dense_eigenvalues(&model, &window, cfg.stability()?)?;
            out.eigenvalues("oracle.csv", &oracle)?;
            let min_im_k = resolvable_im_k(&oracle_basis, o.resolve_decay);
            Some(cross_validate(
                &eigs,
                &oracle,
                &region,
                field.level(q),
                min_im_k,
                o.tolerance,
            ))
        }
        None => None,
    };

    let pass = verdicts.iter().all(|v| v.pass)
        && clusters.as_ref().is_none_or(|c| c.pass)
        && upper_bound.as_ref().is_none_or(|u| u.pass)
        && cross_validation.as_ref().is_none_or(|c| c.pass);
    let report = VerifyReport {
        level: q,
        seed: cfg.seed,
        verdicts,
        upper_bound,
        clusters,
        cross_validation,
        warnings,
        pass,
    };
    out.json("verdicts.json", &report)?;
    Ok(pass)
}
