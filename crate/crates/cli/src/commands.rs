use std::fmt::Write as _;
use std::path::Path;

use qot::metrics::{
    bsf_distance_sq, bsf_p_distance_sq, bures_distance_sq, decomp_distance_sq, decomp_upper_bound,
    delta_sq, dpt_distance_sq, euclid_sq, fidelity_second_derivative, modified_dpt_sq,
    p_swap_fidelity, qfi, self_distance_sq, superfidelity, swap_distance_sq, swap_fidelity,
    uhlmann_fidelity, BoundKind, ConeKind, DistanceReport, Formulation,
};
use qot::states::{evolve, random_density_hs, SeedSpec};
use rayon::prelude::*;

use crate::args::{
    state_or_random, Cone, DistanceArgs, DynamicsArgs, Kind, ScatterArgs, SelfdistArgs,
};
use crate::output::{num, with_pool, write_csv};
use crate::Failure;

fn cone(c: Cone) -> ConeKind {
    match c {
        Cone::All => ConeKind::All,
        Cone::Ppt => ConeKind::Ppt,
    }
}

/// `key: value` lines describing a report.
fn describe(name: &str, r: &DistanceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind: {name}");
    let _ = writeln!(s, "value: {}", num(r.value));
    match r.bound {
        BoundKind::Interval(lo, hi) => {
            let _ = writeln!(s, "bound: interval [{}, {}]", num(lo), num(hi));
        }
        b => {
            let _ = writeln!(s, "bound: {}", b.label());
        }
    }
    let _ = writeln!(s, "method: {}", r.method);
    if !r.solves.is_empty() {
        let max = |f: fn(&qot::metrics::SolveDiagnostics) -> f64| {
            r.solves.iter().map(f).fold(0.0, f64::max)
        };
        let _ = writeln!(s, "solves: {}", r.solves.len());
        let _ = writeln!(s, "iterations: {}", r.total_iterations());
        let _ = writeln!(s, "primal_residual: {}", num(max(|d| d.primal_residual)));
        let _ = writeln!(s, "dual_residual: {}", num(max(|d| d.dual_residual)));
        let _ = writeln!(s, "gap: {}", num(max(|d| d.gap)));
        let _ = writeln!(s, "converged: {}", r.converged());
    }
    s
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(out: Option<&Path>, name: &str, r: &DistanceReport) -> Result<(), Failure> {
    emit(out, &describe(name, r))?;
    if r.converged() {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!(
            "{name}: solver stopped at its iteration cap"
        )))
    }
}

pub fn distance(a: &DistanceArgs) -> Result<(), Failure> {
    let c = &a.common;
    let settings = c.settings()?;
    let rho = state_or_random(&a.rho, c.d, SeedSpec::new(c.seed, 0))?;
    let sigma = state_or_random(&a.sigma, c.d.or(Some(rho.dim())), SeedSpec::new(c.seed, 1))?;
    if rho.dim() != sigma.dim() {
        return Err(Failure::Input(format!(
            "rho has dimension {}, sigma {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let d = rho.dim();
    let obs = || c.observables(d, "su");
    let closed = |v: f64, m: &str| DistanceReport::closed_form(v, m);
    let r = match a.kind {
        Kind::Fidelity => closed(uhlmann_fidelity(&rho, &sigma)?, "uhlmann fidelity"),
        Kind::Superfidelity => closed(superfidelity(&rho, &sigma)?, "superfidelity"),
        Kind::Bures => closed(bures_distance_sq(&rho, &sigma)?, "bures distance squared"),
        Kind::Delta => closed(delta_sq(&rho, &sigma, &obs()?)?, "delta squared"),
        Kind::Euclid => closed(euclid_sq(&rho, &sigma, &obs()?)?, "euclid squared"),
        Kind::DecompUpper => closed(
            decomp_upper_bound(&rho, &sigma, &obs()?)?,
            "decomp upper bound",
        ),
        Kind::DptAll => dpt_distance_sq(
            &rho,
            &sigma,
            &obs()?,
            Formulation::Dpt,
            ConeKind::All,
            &settings,
        )?,
        Kind::DptPpt => dpt_distance_sq(
            &rho,
            &sigma,
            &obs()?,
            Formulation::Dpt,
            ConeKind::Ppt,
            &settings,
        )?,
        Kind::GmpcAll => dpt_distance_sq(
            &rho,
            &sigma,
            &obs()?,
            Formulation::Gmpc,
            ConeKind::All,
            &settings,
        )?,
        Kind::GmpcPpt => dpt_distance_sq(
            &rho,
            &sigma,
            &obs()?,
            Formulation::Gmpc,
            ConeKind::Ppt,
            &settings,
        )?,
        Kind::ModifiedAll => modified_dpt_sq(&rho, &sigma, &obs()?, ConeKind::All, &settings)?,
        Kind::ModifiedPpt => modified_dpt_sq(&rho, &sigma, &obs()?, ConeKind::Ppt, &settings)?,
        Kind::SwapFidelityAll => swap_fidelity(&rho, &sigma, ConeKind::All, &settings)?,
        Kind::SwapFidelityPpt => swap_fidelity(&rho, &sigma, ConeKind::Ppt, &settings)?,
        Kind::SwapDistanceAll => swap_distance_sq(&rho, &sigma, ConeKind::All, &settings)?,
        Kind::SwapDistancePpt => swap_distance_sq(&rho, &sigma, ConeKind::Ppt, &settings)?,
        Kind::Bsf2 => bsf_distance_sq(&rho, &sigma, &settings)?,
        Kind::Decomp => decomp_distance_sq(&rho, &sigma, &obs()?, &settings)?,
        Kind::PSwapFidelity => p_swap_fidelity(&rho, &sigma, a.p, false, &settings)?,
        Kind::PSwapFidelitySym => p_swap_fidelity(&rho, &sigma, a.p, true, &settings)?,
        Kind::BsfP => bsf_p_distance_sq(&rho, &sigma, a.p, &settings)?,
    };
    let name = clap::ValueEnum::to_possible_value(&a.kind)
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    finish(c.out.as_deref(), &name, &r)
}

pub fn selfdist(a: &SelfdistArgs) -> Result<(), Failure> {
    let c = &a.common;
    let settings = c.settings()?;
    let rho = state_or_random(&a.rho, c.d, SeedSpec::new(c.seed, 0))?;
    let obs = c.observables(rho.dim(), "su")?;
    let r = self_distance_sq(&rho, &obs, cone(a.cone), &settings)?;
    finish(c.out.as_deref(), "selfdist", &r)
}

/// `index,F,FS_ppt` over random pairs; pair `k` uses streams `2k` and `2k + 1`.
pub fn scatter(a: &ScatterArgs) -> Result<(), Failure> {
    let c = &a.common;
    let settings = c.settings()?;
    let d = c.dim_or(3)?;
    let n = c.samples_or(100)?;
    let rows: Vec<Result<(String, bool), Failure>> = with_pool(|| {
        (0..n as u64)
            .into_par_iter()
            .map(|k| {
                let rho = random_density_hs(d, SeedSpec::new(c.seed, 2 * k));
                let sigma = random_density_hs(d, SeedSpec::new(c.seed, 2 * k + 1));
                let f = uhlmann_fidelity(&rho, &sigma)?;
                let fs = swap_fidelity(&rho, &sigma, ConeKind::Ppt, &settings)?;
                Ok((format!("{k},{},{}", num(f), num(fs.value)), fs.converged()))
            })
            .collect()
    })?;
    write_rows(c.out.as_deref(), "index,F,FS_ppt", rows)
}

fn write_rows(
    out: Option<&Path>,
    header: &str,
    rows: Vec<Result<(String, bool), Failure>>,
) -> Result<(), Failure> {
    let rows: Vec<(String, bool)> = rows.into_iter().collect::<Result<_, _>>()?;
    let stalled = rows.iter().filter(|(_, ok)| !ok).count();
    let lines: Vec<String> = rows.into_iter().map(|(r, _)| r).collect();
    write_csv(out, header, &lines)?;
    if stalled > 0 {
        return Err(Failure::NotConverged(format!(
            "{stalled} solves stopped at their iteration cap"
        )));
    }
    Ok(())
}

/// `theta,F,FS_ppt` between `rho` and `exp(-i theta H) rho exp(i theta H)`.
/// Two footer rows hold the finite-difference second derivatives at zero and
/// `-F_Q/2` for comparison.
pub fn dynamics(a: &DynamicsArgs) -> Result<(), Failure> {
    let c = &a.common;
    let settings = c.settings()?;
    let d = c.dim_or(4)?;
    let rho = state_or_random(&a.rho, Some(d), SeedSpec::new(c.seed, 0))?;
    let d = rho.dim();
    let obs = c.observables(d, "z")?;
    if obs.len() != 1 {
        return Err(Failure::Input(format!(
            "dynamics needs one observable, got {}",
            obs.len()
        )));
    }
    let h = obs.ops()[0].clone();
    if !(a.theta_step > 0.0) || !(a.theta_stop >= a.theta_start) || !a.theta_start.is_finite() {
        return Err(Failure::Input(
            "need theta-step > 0 and theta-stop >= theta-start".into(),
        ));
    }
    if !(1e-3..=1e-1).contains(&a.fd_step) {
        return Err(Failure::Input(format!(
            "--fd-step must lie in [1e-3, 1e-1], got {}",
            a.fd_step
        )));
    }
    let count = ((a.theta_stop - a.theta_start) / a.theta_step + 1e-9).floor() as usize + 1;
    let mut thetas: Vec<f64> = (0..count)
        .map(|i| a.theta_start + i as f64 * a.theta_step)
        .collect();
    // appended points for the footer: 0 and +-fd_step
    thetas.extend([0.0, a.fd_step, -a.fd_step]);

    let points: Vec<Result<(f64, f64, bool), Failure>> = with_pool(|| {
        thetas
            .par_iter()
            .map(|&t| {
                let rt = evolve(&rho, &h, t)?;
                let f = uhlmann_fidelity(&rho, &rt)?;
                let fs = swap_fidelity(&rho, &rt, ConeKind::Ppt, &settings)?;
                Ok((f, fs.value, fs.converged()))
            })
            .collect()
    })?;
    let points: Vec<(f64, f64, bool)> = points.into_iter().collect::<Result<_, _>>()?;
    let (grid, fd) = points.split_at(count);
    let mut rows: Vec<Result<(String, bool), Failure>> = thetas[..count]
        .iter()
        .zip(grid)
        .map(|(t, (f, fs, ok))| Ok((format!("{},{},{}", num(*t), num(*f), num(*fs)), *ok)))
        .collect();
    let step2 = a.fd_step * a.fd_step;
    let fs_second = (fd[1].1 + fd[2].1 - 2.0 * fd[0].1) / step2;
    let f_second = fidelity_second_derivative(&rho, &h, a.fd_step)?;
    let neg_half_qfi = -qfi(&rho, &h)? / 2.0;
    let fd_ok = fd.iter().all(|p| p.2);
    rows.push(Ok((
        format!("d2_at_0,{},{}", num(f_second), num(fs_second)),
        fd_ok,
    )));
    rows.push(Ok((
        format!("neg_half_qfi,{},{}", num(neg_half_qfi), num(neg_half_qfi)),
        true,
    )));
    write_rows(c.out.as_deref(), "theta,F,FS_ppt", rows)
}
