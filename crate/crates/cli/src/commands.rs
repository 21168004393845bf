use anyhow::{anyhow, Result};
use skewlab::dfa::{
    dfa_decay_experiment, dfa_probe, diameter_bound_dfa, markov_oracle, MarkovSystem, RectangleObservable,
};
use skewlab::maxent::{entropy_brin_katok, entropy_separated, quotient_mem, sample_mu, EntropyReport};
use skewlab::statistics::{
    clt_test, correlation_data, fit_decay, green_kubo_from, stability_profile, stability_sweep, SolenoidSampler,
};
use skewlab::systems::make_perturbed_family;
use skewlab::transfer::{
    check_invariance, choose_cone_params, density_contraction_trials, estimate_diameter, ConeInputs, ConeProbe,
    ConeSampling, Potential,
};
use skewlab::SystemSpec;

use crate::config::ExperimentConfig;
use crate::report::{cell, num, Report, Table};

fn lambda_s(spec: &SystemSpec) -> f64 {
    match *spec {
        SystemSpec::Doubling { lambda_s } | SystemSpec::Mp { lambda_s, .. } | SystemSpec::Perturbed { lambda_s, .. } => {
            lambda_s
        }
    }
}

pub fn cone_check(cfg: &ExperimentConfig, seed: u64, rep: &mut Report) -> Result<()> {
    let sys = cfg.system.build()?;
    let c = &cfg.cone;
    let inputs = ConeInputs::for_system(&sys, c.alpha, 0.0);
    let auto = choose_cone_params(&inputs);
    let params = match (&auto, c.b) {
        (Ok(p), Some(b)) => p.with_b(&inputs, b),
        (Ok(p), None) => p.clone(),
        (Err(e), _) => {
            rep.set("infeasible", e.to_string());
            rep.check("cone parameters feasible", false);
            return Ok(());
        }
    };
    rep.set_json("params", &params)?;
    match params.validate() {
        Ok(()) => rep.check("cone parameters feasible", true),
        Err(e) => {
            rep.set("infeasible", e.to_string());
            rep.check("cone parameters feasible", false);
        }
    }
    let sampling = ConeSampling {
        depth: c.depth,
        leaves: c.leaves,
        densities: c.densities,
        leaf_pairs: c.leaf_pairs,
        elements: c.elements,
    };
    let pot = Potential::default();
    let probe = ConeProbe::build(&sys, &params, &sampling, seed)?;
    let margins = check_invariance(&sys, &params, &pot, &probe, c.elements, seed)?;
    let mut t = Table::new(&["element", "b_ratio", "b_ratio_image", "c_ratio", "c_ratio_image", "in_cone", "image_in_cone"]);
    for (k, m) in margins.iter().enumerate() {
        t.push(vec![
            cell(k),
            num(m.b_before),
            num(m.b_after),
            num(m.c_before),
            num(m.c_after),
            cell(m.in_cone),
            cell(m.image_in_cone),
        ]);
    }
    rep.table("margins", &t)?;
    let b_fail = margins.iter().filter(|m| m.b_before > params.b || m.b_after > params.sigma * params.b).count();
    let c_fail = margins.iter().filter(|m| m.c_before > params.c || m.c_after > params.sigma * params.c).count();
    rep.set("condition_b_failures", b_fail);
    rep.set("condition_c_failures", c_fail);
    rep.check("condition B margins", b_fail == 0);
    rep.check("condition C margins", c_fail == 0);

    let trials = density_contraction_trials(&sys, &params, &pot, c.depth, c.contraction_trials, seed)?;
    let mut t = Table::new(&["trial", "theta_before", "theta_after", "bound", "pushed_in_cone"]);
    for (k, tr) in trials.iter().enumerate() {
        t.push(vec![cell(k), num(tr.theta_before), num(tr.theta_after), num(tr.bound), cell(tr.pushed_in_cone)]);
    }
    rep.plot_table("contraction", &t)?;
    let violations = trials.iter().filter(|t| t.theta_after > t.bound || !t.pushed_in_cone).count();
    rep.set("contraction_violations", violations);
    rep.check("density-cone contraction", violations == 0);

    let d = estimate_diameter(&sys, &params, &pot, &probe, c.diameter_pairs, seed)?;
    rep.set_json("diameter", &d)?;
    rep.check("sampled diameter below bound", d.certified);
    Ok(())
}

fn entropy_table(r: &EntropyReport) -> Table {
    let mut t = Table::new(&["n", "eps", "value", "h_at_n"]);
    for c in &r.cells {
        t.push(vec![cell(c.n), num(c.eps), num(c.value), num(c.h_at_n)]);
    }
    t
}

pub fn entropy(cfg: &ExperimentConfig, seed: u64, rep: &mut Report) -> Result<()> {
    let sys = cfg.system.build()?;
    let e = &cfg.entropy;
    let nu = quotient_mem(&sys.base, e.grid)?;
    let ec = e.estimator_config();
    let sep = entropy_separated(&sys, &nu, &ec, seed);
    let bk = entropy_brin_katok(&sys, &nu, &ec, seed);
    rep.plot_table("entropy_separated", &entropy_table(&sep))?;
    rep.plot_table("entropy_brin_katok", &entropy_table(&bk))?;
    let expected = e.expected.unwrap_or((sys.degree() as f64).ln());
    rep.set("expected", expected);
    rep.set("h_separated", sep.h_est);
    rep.set("h_brin_katok", bk.h_est);
    rep.set("budget_exhausted", sep.budget_exhausted);
    rep.set("ball_warnings", bk.warnings);
    let near = |h: f64| (h - expected).abs() <= e.tolerance * expected;
    rep.check("separated-set estimate", near(sep.h_est));
    rep.check("Brin-Katok estimate", near(bk.h_est));
    rep.check(
        "estimators agree",
        (sep.h_est - bk.h_est).abs() <= e.agreement * sep.h_est.abs().max(bk.h_est.abs()),
    );
    Ok(())
}

pub fn decay(cfg: &ExperimentConfig, seed: u64, rep: &mut Report) -> Result<()> {
    let sys = cfg.system.build()?;
    let d = &cfg.decay;
    let sampler = SolenoidSampler::new(&sys);
    let psi = d.partner.clone().unwrap_or_else(|| d.observable.clone());
    let data = correlation_data(&sampler, &d.observable, &psi, d.max_lag, d.samples, seed);
    let prof = data.profile();
    let lags: Vec<usize> = (0..=d.max_lag).collect();
    let fit = fit_decay(&lags, &prof);
    let mut t = Table::new(&["lag", "estimate", "stderr", "used_in_fit"]);
    for (n, c) in prof.iter().enumerate() {
        t.push(vec![cell(n), num(c.value), num(c.stderr), cell(fit.used.contains(&n))]);
    }
    rep.plot_table("correlations", &t)?;
    rep.set("observable", d.observable.label());
    rep.set("partner", psi.label());
    rep.set("tau", num(fit.tau));
    rep.set("r2", num(fit.r2));
    rep.set("k", num(fit.k));
    rep.set("conclusive", fit.conclusive);
    rep.check("conclusive exponential fit", fit.conclusive);
    rep.check(
        "rate within configured range",
        fit.conclusive && fit.tau >= d.tau_range[0] && fit.tau <= d.tau_range[1],
    );
    Ok(())
}

pub fn clt(cfg: &ExperimentConfig, seed: u64, rep: &mut Report) -> Result<()> {
    let sys = cfg.system.build()?;
    let c = &cfg.clt;
    let sampler = SolenoidSampler::new(&sys);
    let data = correlation_data(&sampler, &c.observable, &c.observable, c.max_lag, c.gk_samples, seed);
    let gk = green_kubo_from(&data, c.truncation);
    let prof = data.profile();
    let mut t = Table::new(&["lag", "estimate", "stderr"]);
    for (n, e) in prof.iter().enumerate() {
        t.push(vec![cell(n), num(e.value), num(e.stderr)]);
    }
    rep.plot_table("autocorrelation", &t)?;
    let res = clt_test(&sampler, &c.observable, c.n, c.count, seed, &gk);
    rep.set("observable", c.observable.label());
    rep.set("sigma2_gk", num(gk.sigma2.value));
    rep.set("sigma2_gk_stderr", num(gk.sigma2.stderr));
    rep.set("truncation", gk.truncation);
    rep.set("sigma2_emp", num(res.sigma2_emp));
    rep.set("ks_statistic", num(res.ks_statistic));
    rep.set("p_value", num(res.p_value));
    rep.set("degenerate", res.degenerate);
    if res.degenerate {
        rep.check("degenerate variance flagged", true);
    } else {
        let s2 = gk.sigma2.value;
        rep.check(
            "empirical variance matches Green-Kubo",
            (res.sigma2_emp - s2).abs() <= c.variance_tolerance * s2,
        );
        rep.check("Kolmogorov-Smirnov p-value", res.p_value > c.min_p_value);
    }
    Ok(())
}

pub fn stability(cfg: &ExperimentConfig, seed: u64, rep: &mut Report) -> Result<()> {
    let s = &cfg.stability;
    let ls = lambda_s(&cfg.system);
    let rows = stability_sweep(|t| make_perturbed_family(t, ls), &s.observables, &s.t_grid, s.samples, s.grid, seed);
    let mut t = Table::new(&["t", "observable", "integral", "stderr", "diff", "diff_stderr", "base_integral"]);
    for r in &rows {
        if let Some(e) = &r.error {
            return Err(anyhow!("t = {}: {e}", r.t));
        }
        t.push(vec![
            num(r.t),
            r.observable.clone(),
            num(r.integral.value),
            num(r.integral.stderr),
            num(r.diff),
            num(r.diff_stderr),
            r.base_integral.map_or_else(String::new, num),
        ]);
    }
    rep.table("stability", &t)?;
    for (k, o) in s.observables.iter().enumerate() {
        let mut p = Table::new(&["t", "diff", "diff_stderr"]);
        for r in rows.iter().filter(|r| r.observable == o.label()) {
            p.push(vec![num(r.t), num(r.diff), num(r.diff_stderr)]);
        }
        rep.write(&format!("stability_{k}.dat"), &p.dat())?;
        let check = stability_profile(&rows, &o.label());
        rep.check(&format!("decreasing profile for {}", o.label()), check.pass);
        rep.set_json(&format!("profile_{k}"), &check)?;
    }
    Ok(())
}

pub fn dfa_decay(cfg: &ExperimentConfig, seed: u64, rep: &mut Report) -> Result<()> {
    let d = &cfg.dfa;
    let ms = MarkovSystem::new(d.system.clone())?;
    let obs = RectangleObservable { ms: &ms, values: d.values.clone() };
    let res = dfa_decay_experiment(&ms, &obs, &obs, d.max_lag, d.samples, seed);
    let mut t = Table::new(&["lag", "estimate", "stderr", "oracle"]);
    let mut mismatches = 0;
    for (n, c) in res.correlations.iter().enumerate() {
        let o = markov_oracle(&ms, &d.values, &d.values, n);
        mismatches += usize::from(!c.within(o, 3.0));
        t.push(vec![cell(n), num(c.value), num(c.stderr), num(o)]);
    }
    rep.plot_table("dfa_correlations", &t)?;
    rep.set("balanced", res.balanced);
    rep.set("tau", num(res.report.tau));
    rep.set("r2", num(res.report.r2));
    rep.set("oracle_mismatches", mismatches);
    rep.set("expansion_factor", ms.expansion_factor(d.alpha));
    rep.check("Monte-Carlo matches transition-matrix oracle", mismatches == 0);
    rep.check(
        "conclusive exponential fit",
        res.report.conclusive && res.report.tau > 0.0 && res.report.tau < 1.0,
    );
    let params = choose_cone_params(&ms.cone_inputs(d.alpha))?;
    let probe = dfa_probe(&ms, &params, 4, 3, 10, seed)?;
    let diam = diameter_bound_dfa(&params, &ms, &probe, d.diameter_pairs, seed);
    rep.set_json("diameter", &diam)?;
    rep.check("sampled diameter below closed form", diam.within);
    Ok(())
}

pub fn sample(cfg: &ExperimentConfig, seed: u64, rep: &mut Report) -> Result<()> {
    let sys = cfg.system.build()?;
    let s = &cfg.sample;
    let nu = quotient_mem(&sys.base, s.grid)?;
    let emp = sample_mu(&sys, &nu, s.count, s.depth, seed);
    let mut buf = Vec::new();
    emp.write_csv(&mut buf)?;
    rep.write("samples.csv", std::str::from_utf8(&buf)?)?;
    rep.set("count", emp.len());
    rep.set("quotient_residual", num(nu.residual));
    rep.check("samples written", emp.len() == s.count);
    Ok(())
}
