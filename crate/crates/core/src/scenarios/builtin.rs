//! The bundled scenario pipelines.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::checks::{infinite_type_check, sample_in_domain, unit_direction};
use super::report::{Relation, Report, Table};
use super::Record;
use crate::domains::{
    ball, boundary_distance, boundary_distance_numeric, directional_distance_bruteforce, ex21_d, ex21_omega, ex22_d,
    ex22_omega_local, flat,
};
use crate::error::{Error, Result};
use crate::extension::{
    ball_dichotomy_demo, boundary_grid, boundary_value, cluster_set_sample, continuity_modulus, dichotomy_report,
    dichotomy_table, ex21_chart_map, ex21_psi, ex22_dichotomy_demo, extend_map, DichotomyInput, DichotomyReport,
    DichotomyRow, ExtensionResult,
};
use crate::metrics::{
    convex_distance_lower_bound, ex21_rate_constants, graham_bounds, graham_from_directional,
    inscribed_ball_upper_bound, kob_distance_ball_exact, kob_metric_ball_exact, ltc_fit, path_distance_upper,
    sibony_lower_bound, PathSettings, SIBONY_ALPHA,
};
use crate::point::{c, CPoint};
use crate::psh::{
    ball_rho, check_psh, defining_quotient, ex21_min_s, ex21_rho, ex21_u, ex22_map, ex22_rho, ex22_rho_ww, hopf_fit,
    lagrange_residuals, lagrange_root, levi_form, levi_form_fd, step1_constant_ex21, AlphaMode, PshWitness,
};
use crate::regularity::{
    bundled_chart, dini_integral, ex21_chart, ex22_chart, select_embedding_params, verify_embedding,
    verify_lipschitz_sandwich, DiniIntegral, HFunction, ModulusOfContinuity, BUNDLED_CHARTS,
};

pub(super) struct Ctx {
    pub rng: ChaCha8Rng,
    pub tol: f64,
    pub report: Report,
}

fn directions(n: usize, count: usize, rng: &mut impl Rng) -> Vec<CPoint> {
    (0..count).map(|_| unit_direction(n, rng)).collect()
}

fn count_where<T>(xs: &[T], f: impl Fn(&T) -> bool) -> f64 {
    xs.iter().filter(|x| f(x)).count() as f64
}

// ---------------------------------------------------------------- example21

pub(super) fn example21(cx: &mut Ctx) -> Result<()> {
    let tol = cx.tol;

    let stage = cx.report.stage("step1");
    let (sup6, ct) = step1_constant_ex21();
    let mut violations = 0usize;
    let mut worst_ratio = f64::INFINITY;
    let mut worst_residual: f64 = 0.0;
    for i in 0..100 {
        for j in 0..100 {
            let x0 = 0.9 + 0.1 * (i as f64 + 0.5) / 100.0;
            let y0 = 0.1 * j as f64 / 100.0;
            let gap = (x0 * x0 + y0 - 1.0).abs();
            if x0 * x0 + y0 >= 1.0 {
                continue;
            }
            let s = ex21_min_s(x0, y0);
            if s < ct * gap {
                violations += 1;
            }
            worst_ratio = worst_ratio.min(s / gap);
            let x = lagrange_root(x0, y0);
            let (r1, r2) = lagrange_residuals(x0, y0, x, 1.0 - x * x);
            worst_residual = worst_residual.max(r1.abs()).max(r2.abs());
        }
    }
    cx.report.record(
        Record::new(stage, "min_s_over_gap", worst_ratio)
            .constant("sup_6x2_2y_1", sup6)
            .constant("c_tilde", ct)
            .input("grid", 100.0),
    );
    cx.report.record(Record::new(stage, "lagrange_residual", worst_residual));
    cx.report.check(stage, "violations", violations as f64, Relation::Eq, 0.0);
    cx.report.check(stage, "worst_ratio", worst_ratio, Relation::Ge, ct);

    let stage = cx.report.stage("tdist");
    let omega = ex21_omega();
    let numeric = omega.without_closed_form();
    let pts = sample_in_domain(&omega, 1000, 1.0, &mut cx.rng)?;
    let mut max_err: f64 = 0.0;
    for z in &pts {
        let got = boundary_distance_numeric(&numeric, z)?.value;
        let want = (1.0 - z[0].norm() - z[1].norm()) / std::f64::consts::SQRT_2;
        max_err = max_err.max((got - want).abs());
    }
    cx.report.record(Record::new(stage, "max_abs_error", max_err).input("samples", pts.len() as f64));
    cx.report.check(stage, "max_abs_error", max_err, Relation::Le, tol);

    let stage = cx.report.stage("levi");
    let u = ex21_u();
    let pts: Vec<CPoint> = sample_in_domain(&omega, 1000, 1.0, &mut cx.rng)?
        .into_iter()
        .filter(|z| z[1].norm() > 0.0 && z[0].norm() > 0.0)
        .collect();
    let mut min_excess = f64::INFINITY;
    for z in &pts {
        let v = unit_direction(2, &mut cx.rng);
        min_excess = min_excess.min(levi_form(&u, z, &v)? - 0.25);
    }
    cx.report.record(Record::new(stage, "min_levi_minus_quarter", min_excess).input("samples", pts.len() as f64));
    cx.report.check(stage, "min_levi_minus_quarter", min_excess, Relation::Ge, -1e-8);

    let stage = cx.report.stage("rate");
    let (beta, c_tilde) = ex21_rate_constants(0.25, SIBONY_ALPHA);
    cx.report.record(
        Record::new(stage, "rate_constant", c_tilde)
            .constant("beta", beta)
            .constant("c", 0.25)
            .constant("alpha", SIBONY_ALPHA),
    );
    let pts = sample_in_domain(&omega, 60, 1.0, &mut cx.rng)?;
    let mut worst: f64 = f64::NEG_INFINITY;
    for z in pts.iter().filter(|z| z[0].norm() > 0.0 && z[1].norm() > 0.0) {
        let v = unit_direction(2, &mut cx.rng);
        let lo = sibony_lower_bound(&u, z, &v, 0.25, SIBONY_ALPHA)?;
        let (_, hi) = graham_bounds(&omega, z, &v)?;
        worst = worst.max(lo.value / hi.value);
    }
    cx.report.record(Record::new(stage, "max_sibony_over_graham_upper", worst));
    cx.report.check(stage, "sibony_below_upper", worst, Relation::Le, 1.0);

    let stage = cx.report.stage("psh");
    let rho = ex21_rho(ct);
    let d = ex21_d();
    let pts = sample_in_domain(&d, 200, 1.0, &mut cx.rng)?;
    let dirs = directions(2, 4, &mut cx.rng);
    let rep = check_psh(&rho, &d, &pts, &dirs)?;
    cx.report.record(Record::new(stage, "min_levi", rep.min_levi).input("checked", rep.checked as f64));
    cx.report.check(stage, "violations", rep.violations as f64, Relation::Eq, 0.0);
    Ok(())
}

// ---------------------------------------------------------------- example22

pub(super) fn example22(cx: &mut Ctx) -> Result<()> {
    let tol = cx.tol;
    let d = ex22_d();
    let rho = ex22_rho();

    let stage = cx.report.stage("levi_closed_form");
    let value_only = PshWitness::new("exp(-1/|z2|^4) - re(z1)", crate::domains::ex22_rho);
    let pts: Vec<CPoint> = sample_in_domain(&d, 4000, 1.0, &mut cx.rng)?
        .into_iter()
        .filter(|z| z[1].norm() >= 0.5)
        .take(1000)
        .collect();
    let e2 = CPoint::basis(2, 1);
    let mut max_rel: f64 = 0.0;
    for z in &pts {
        let fd = levi_form_fd(&value_only, z, &e2)?.value;
        let exact = ex22_rho_ww(z[1].norm());
        max_rel = max_rel.max((fd - exact).abs() / exact.abs());
    }
    cx.report.record(Record::new(stage, "max_relative_error", max_rel).input("samples", pts.len() as f64));
    cx.report.check(stage, "samples", pts.len() as f64, Relation::Eq, 1000.0);
    cx.report.check(stage, "max_relative_error", max_rel, Relation::Le, tol);

    let stage = cx.report.stage("psh");
    let pts = sample_in_domain(&d, 300, 1.0, &mut cx.rng)?;
    let dirs = directions(2, 4, &mut cx.rng);
    let rep = check_psh(&rho, &d, &pts, &dirs)?;
    cx.report.record(Record::new(stage, "min_levi", rep.min_levi).input("checked", rep.checked as f64));
    cx.report.check(stage, "violations", rep.violations as f64, Relation::Eq, 0.0);

    let stage = cx.report.stage("infinite_type");
    let orders: Vec<u32> = (1..=20).collect();
    let profile = |x: f64| flat(x * x);
    let it = infinite_type_check(&profile, &orders)?;
    for chk in &it.checks {
        cx.report.record(Record::new(stage, "ratio_at_1e-3", chk.ratios[2]).input("order", chk.order as f64));
    }
    let failing = count_where(&it.checks, |c| !c.pass);
    cx.report.check(stage, "failing_orders", failing, Relation::Eq, 0.0);

    let stage = cx.report.stage("hopf");
    let mut pts = Vec::new();
    for k in 2..=12 {
        for _ in 0..6 {
            let s = 2f64.powi(-k) * cx.rng.gen_range(1.0..2.0);
            let r = cx.rng.gen_range(0.0..0.3);
            let th = cx.rng.gen_range(0.0..std::f64::consts::TAU);
            pts.push(CPoint(vec![c(s, 0.0), c(r * th.cos(), r * th.sin())]));
        }
    }
    let q = defining_quotient(&rho, &d, &pts)?;
    let phi = rho.scaled(q.inf);
    let fit = hopf_fit(&phi, &d, &pts, AlphaMode::Fixed(1.0))?;
    cx.report.record(Record::new(stage, "defining_quotient_inf", q.inf).constant("sup", q.sup));
    cx.report.record(
        Record::new(stage, "hopf_constant", fit.c)
            .constant("alpha", fit.alpha)
            .input("bands", fit.bands as f64)
            .input("samples", fit.samples as f64),
    );
    cx.report.check(stage, "residual", fit.residual, Relation::Le, 0.0);
    cx.report.check(stage, "lower_margin", fit.lower_margin, Relation::Le, 1e-12);

    let stage = cx.report.stage("cluster");
    let f = ex22_map();
    let p = CPoint::zeros(2);
    let seqs: Vec<Vec<CPoint>> = [(1.0, 0.0), (0.5, 0.2), (0.3, -0.25)]
        .iter()
        .map(|&(a, b)| (1..=30).map(|k| CPoint::real(&[a, b]).scale_re(0.5f64.powi(k))).collect())
        .collect();
    for s in &seqs {
        if !s.iter().all(|z| d.inside(z)) {
            return Err(Error::Config("approach sequence leaves Ex22_D".into()));
        }
    }
    let clusters = cluster_set_sample(&|z: &CPoint| f.apply(z), &p, &seqs)?;
    cx.report.record(Record::new(stage, "clusters", clusters.len() as f64));
    cx.report.check(stage, "clusters", clusters.len() as f64, Relation::Eq, 1.0);
    cx.report.check(stage, "distance_to_q", clusters[0].norm(), Relation::Le, 1e-3);

    let stage = cx.report.stage("log_type");
    let local = ex22_omega_local(0.5);
    let samples: Vec<(CPoint, CPoint)> = (1..=24)
        .map(|k| (CPoint::real(&[0.25 * 2f64.powf(-(k as f64) / 2.0), 0.0]), CPoint::basis(2, 1)))
        .collect();
    let rejected = match ltc_fit(&local, &samples) {
        Err(Error::NotLogTypeConvex) => 1.0,
        Ok(fit) => {
            cx.report.record(Record::new(stage, "ltc_nu", fit.nu).constant("C", fit.c));
            0.0
        }
        Err(e) => return Err(e),
    };
    cx.report.check(stage, "not_log_type_convex", rejected, Relation::Eq, 1.0);
    Ok(())
}

// ---------------------------------------------------------------- ball-sandwich

pub(super) fn ball_sandwich(cx: &mut Ctx) -> Result<()> {
    let tol = cx.tol;
    let b = ball(2);

    let stage = cx.report.stage("graham");
    let pts = sample_in_domain(&b, 100, 1.0, &mut cx.rng)?;
    let mut rows = Vec::new();
    let mut violations = 0usize;
    let mut lower_worst: f64 = 0.0;
    let mut upper_worst: f64 = 0.0;
    for z in &pts {
        let v = unit_direction(2, &mut cx.rng);
        let dv = directional_distance_bruteforce(&b, z, &v)?;
        let (lo, hi) = graham_from_directional(z, &v, dv);
        let exact = kob_metric_ball_exact(z, &v)?;
        let lo_excess = (lo.value - exact) / exact;
        let hi_excess = (exact - hi.value) / exact;
        lower_worst = lower_worst.max(lo_excess);
        upper_worst = upper_worst.max(hi_excess);
        if lo_excess > tol || hi_excess > tol {
            violations += 1;
        }
        let mut row: Vec<String> = z.0.iter().chain(&v.0).flat_map(|x| [x.re, x.im]).map(|x| format!("{x:e}")).collect();
        row.extend([lo.value, exact, hi.value].map(|x| format!("{x:e}")));
        rows.push(row);
    }
    cx.report.record(Record::new(stage, "max_lower_excess", lower_worst).tolerance("relative", tol));
    cx.report.record(Record::new(stage, "max_upper_deficit", upper_worst).tolerance("relative", tol));
    cx.report.check(stage, "violations", violations as f64, Relation::Eq, 0.0);
    cx.report.table(Table {
        name: "graham".into(),
        header: ["z1_re", "z1_im", "z2_re", "z2_im", "v1_re", "v1_im", "v2_re", "v2_im", "lower", "exact", "upper"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows,
    });

    let stage = cx.report.stage("inscribed_sibony");
    let rho = ball_rho(2);
    let mut violations = 0usize;
    for z in pts.iter().take(50) {
        let v = unit_direction(2, &mut cx.rng);
        let exact = kob_metric_ball_exact(z, &v)?;
        let up = inscribed_ball_upper_bound(&b, z, &v)?.value;
        let lo = sibony_lower_bound(&rho, z, &v, 1.0, SIBONY_ALPHA)?.value;
        if up < exact * (1.0 - tol) || lo > exact * (1.0 + tol) {
            violations += 1;
        }
    }
    cx.report.check(stage, "violations", violations as f64, Relation::Eq, 0.0);

    let stage = cx.report.stage("distance");
    let settings = PathSettings::default();
    let mut violations = 0usize;
    for pair in pts.chunks(2).take(4) {
        let (a, w) = (&pair[0], &pair[1]);
        let exact = kob_distance_ball_exact(a, w)?;
        let path = path_distance_upper(&b, a, w, &settings)?;
        let cvx = convex_distance_lower_bound(boundary_distance(&b, a)?, boundary_distance(&b, w)?)?.value;
        cx.report.record(
            Record::new(stage, "path_upper", path)
                .method("path")
                .constant("exact", exact)
                .constant("convex_lower", cvx),
        );
        if path < exact * (1.0 - tol) || cvx > exact * (1.0 + tol) {
            violations += 1;
        }
    }
    cx.report.check(stage, "violations", violations as f64, Relation::Eq, 0.0);

    let stage = cx.report.stage("log_type");
    let samples: Vec<(CPoint, CPoint)> = (1..=30)
        .map(|k| (CPoint::real(&[1.0 - 2f64.powf(-(k as f64) / 2.0 - 1.0), 0.0]), CPoint::basis(2, 1)))
        .collect();
    let fit = ltc_fit(&b, &samples)?;
    cx.report.record(Record::new(stage, "ltc_nu", fit.nu).constant("C", fit.c));
    cx.report.check(stage, "max_violation", fit.max_violation, Relation::Le, 0.0);
    Ok(())
}

// ---------------------------------------------------------------- extension-oracle

pub(super) fn extension_oracle(cx: &mut Ctx) -> Result<()> {
    let tol = cx.tol;
    let chart = ex21_chart();
    let map = ex21_chart_map();
    let psi = ex21_psi(1.0)?;

    let stage = cx.report.stage("cauchy_riemann");
    let interior: Vec<CPoint> = chart
        .sample_above_graph(20, 0.2, &mut cx.rng)
        .iter()
        .map(|z| chart.to_chart(z))
        .collect();
    let defect = map.without_derivative().cauchy_riemann_defect(&chart, &interior)?;
    cx.report.record(Record::new(stage, "relative_defect", defect).method("cauchy_circle"));
    cx.report.check(stage, "relative_defect", defect, Relation::Le, 1e-6);

    let stage = cx.report.stage("extend");
    let grid = boundary_grid(&chart, 20, 0.08);
    let results = extend_map(&map, &chart, &psi, &grid, tol)?;
    let direct = |r: &ExtensionResult| {
        let z = chart.from_chart(&r.xi);
        CPoint(vec![z[0] * z[0], z[1]])
    };
    let max_dev = results.iter().map(|r| r.value.dist(&direct(r))).fold(0.0, f64::max);
    let over_budget = results
        .iter()
        .map(|r| r.value.dist(&direct(r)) - r.error_budget())
        .fold(f64::NEG_INFINITY, f64::max);
    let r0 = &results[0];
    cx.report.record(
        Record::new(stage, "max_deviation", max_dev)
            .input("grid_points", results.len() as f64)
            .input("t_prime", r0.t_prime)
            .input("levels", r0.levels as f64)
            .tolerance("tol", tol),
    );
    cx.report.check(stage, "max_deviation", max_dev, Relation::Le, 1e-6);
    cx.report.check(stage, "deviation_over_budget", over_budget, Relation::Le, 0.0);
    cx.report.table(Table {
        name: "extension".into(),
        header: ExtensionResult::csv_header(2),
        rows: results.iter().map(|r| r.csv_row()).collect(),
    });

    let stage = cx.report.stage("t_prime");
    let mut spread: f64 = 0.0;
    for r in results.iter().step_by(7) {
        let half = boundary_value(&map, &chart, &psi, &r.xi, 0.5 * r.t_prime, tol)?;
        spread = spread.max(half.value.dist(&r.value));
    }
    cx.report.record(Record::new(stage, "max_spread", spread));
    cx.report.check(stage, "max_spread", spread, Relation::Le, 2.0 * tol);

    let stage = cx.report.stage("certificate");
    let mut worst = f64::NEG_INFINITY;
    for r in &results {
        let mut top = r.xi.clone();
        top[1] += c(0.0, r.t_prime);
        worst = worst.max(r.value.dist(&map.eval(&top)) - r.tail_bound);
    }
    cx.report.record(Record::new(stage, "max_excess_over_tail", worst).constant("tail_bound", r0.tail_bound));
    cx.report.check(stage, "max_excess_over_tail", worst, Relation::Le, 0.0);

    let stage = cx.report.stage("continuity");
    let sub: Vec<ExtensionResult> = results.iter().step_by(3).cloned().collect();
    let cont = continuity_modulus(&map, &sub, &psi, 1e-3)?;
    for &(r, m) in &cont.empirical {
        cx.report.record(Record::new(stage, "empirical_modulus", m).input("r", r));
    }
    cx.report.check(stage, "violations", cont.violations as f64, Relation::Eq, 0.0);
    cx.report.check(stage, "tends_to_zero", cont.tends_to_zero as u8 as f64, Relation::Eq, 1.0);

    let stage = cx.report.stage("cluster");
    let p = CPoint::real(&[1.0, 0.0]);
    let d = ex21_d();
    let seqs: Vec<Vec<CPoint>> = [(-1.0, 0.0), (-0.6, 0.3), (-0.8, -0.4)]
        .iter()
        .map(|&(a, b)| (1..=30).map(|k| p.axpy_re(0.5f64.powi(k), &CPoint(vec![c(a, 0.0), c(0.0, b)]))).collect())
        .collect();
    for s in &seqs {
        if !s.iter().all(|z| d.inside(z)) {
            return Err(Error::Config("approach sequence leaves Ex21_D".into()));
        }
    }
    let clusters = cluster_set_sample(&|z: &CPoint| CPoint(vec![z[0] * z[0], z[1]]), &p, &seqs)?;
    cx.report.check(stage, "clusters", clusters.len() as f64, Relation::Eq, 1.0);
    cx.report.check(stage, "distance_to_image", clusters[0].dist(&p), Relation::Le, 1e-3);
    Ok(())
}

// ---------------------------------------------------------------- dini-suite

pub(super) fn dini_suite(cx: &mut Ctx) -> Result<()> {
    let tol = cx.tol;
    let finite = |w: &ModulusOfContinuity, eps: f64| -> Result<Option<f64>> { Ok(dini_integral(w, eps)?.value()) };

    let stage = cx.report.stage("closed_forms");
    let sqrt = ModulusOfContinuity::from_expr("r^0.5", 1.0)?;
    let lin = ModulusOfContinuity::from_expr("r", 1.0)?;
    let v_sqrt = finite(&sqrt, 1.0)?.unwrap_or(f64::NAN);
    let v_lin = finite(&lin, 1.0)?.unwrap_or(f64::NAN);
    cx.report.record(Record::new(stage, "dini", v_sqrt).input("eps", 1.0).method("r^0.5"));
    cx.report.record(Record::new(stage, "dini", v_lin).input("eps", 1.0).method("r"));
    cx.report.check(stage, "sqrt_error", (v_sqrt - 2.0).abs(), Relation::Le, tol);
    cx.report.check(stage, "linear_error", (v_lin - 1.0).abs(), Relation::Le, 1e-9);

    let stage = cx.report.stage("divergent");
    let log = ModulusOfContinuity::from_expr("1/(1+abs(log(r)))", 1.0)?;
    let res = dini_integral(&log, 1.0)?;
    if let DiniIntegral::Divergent { decay_exponent, partial_sum, .. } = res {
        cx.report.record(
            Record::new(stage, "partial_sum", partial_sum)
                .method("1/(1+|log r|)")
                .constant("decay_exponent", decay_exponent),
        );
    }
    cx.report.check(stage, "declared_divergent", res.is_divergent() as u8 as f64, Relation::Eq, 1.0);

    let stage = cx.report.stage("composite");
    let cases = ["r^0.5", "r", "r^0.25", "1/(1+abs(log(r)))^2"];
    let maps = [(2.0, 0.5), (0.5, 2.0), (3.0, 1.0)];
    let mut lost = 0usize;
    for src in cases {
        let w = ModulusOfContinuity::from_expr(src, 1.0)?;
        for &(kappa, m) in &maps {
            let comp = w.composed(kappa, m);
            let eps = comp.domain_end().min(1.0);
            let v = finite(&comp, eps)?;
            cx.report.record(
                Record::new(stage, "dini", v.unwrap_or(f64::INFINITY))
                    .method(src)
                    .input("kappa", kappa)
                    .input("m", m)
                    .input("eps", eps),
            );
            if v.is_none() {
                lost += 1;
            }
        }
    }
    cx.report.check(stage, "lost_dini", lost as f64, Relation::Eq, 0.0);

    let stage = cx.report.stage("h_function");
    let h = HFunction::new(sqrt.clone());
    // h(t) = (2/3) t^{3/2} for sqrt(r)
    let h_err = (h.eval(0.25) - 1.0 / 12.0).abs();
    let inv_err = (h.inverse(1.0 / 12.0) - 0.25).abs();
    cx.report.record(Record::new(stage, "h(0.25)", h.eval(0.25)));
    cx.report.check(stage, "h_error", h_err, Relation::Le, tol);
    cx.report.check(stage, "inverse_error", inv_err, Relation::Le, tol);

    let parts = crate::regularity::dyadic_contributions(&sqrt, 1.0, 60);
    cx.report.table(Table {
        name: "dini_contributions".into(),
        header: vec!["level".into(), "r_hi".into(), "contribution".into(), "error".into()],
        rows: parts
            .iter()
            .enumerate()
            .map(|(k, p)| vec![k.to_string(), format!("{:e}", 0.5f64.powi(k as i32)), format!("{:e}", p.0), format!("{:e}", p.1)])
            .collect(),
    });
    Ok(())
}

// ---------------------------------------------------------------- embedding-suite

pub(super) fn embedding_suite(cx: &mut Ctx) -> Result<()> {
    let stage = cx.report.stage("lipschitz_sandwich");
    for name in BUNDLED_CHARTS {
        let (chart, d) = bundled_chart(name)?;
        let zs = chart.sample_above_graph(200, 0.5 * chart.radius, &mut cx.rng);
        let fit = verify_lipschitz_sandwich(&d, &chart, &zs)?;
        let bound = fit.bound.unwrap_or(f64::INFINITY);
        cx.report.record(
            Record::new(stage, "sandwich_c", fit.c)
                .method(name)
                .constant("sqrt_1_plus_lip2", bound)
                .input("samples", fit.samples as f64),
        );
        cx.report.check(stage, &format!("{name}_c_at_least_1"), fit.c, Relation::Ge, 1.0 - 1e-9);
        cx.report.check(stage, &format!("{name}_c_within_bound"), fit.c, Relation::Le, bound + 0.05);
        cx.report.check(stage, &format!("{name}_distance_below_height"), fit.min_gap, Relation::Ge, -1e-12);
    }

    let stage = cx.report.stage("embedding");
    let chart = ex22_chart();
    let d = ex22_d();
    let params = select_embedding_params(&chart, 1.0, 0.2)?;
    let xis: Vec<CPoint> = chart
        .sample_graph_args(100, 0.02, &mut cx.rng)
        .iter()
        .map(|a| chart.from_chart(&chart.boundary_point(a)))
        .collect();
    let zetas = params.sample(100, &mut cx.rng);
    let rep = verify_embedding(&d, &chart, &xis, &params, &zetas)?;
    cx.report.record(
        Record::new(stage, "worst_margin", rep.worst_margin)
            .constant("beta", params.beta)
            .constant("epsilon", params.epsilon)
            .input("pairs", rep.pairs as f64)
            .method(match params.binding {
                crate::regularity::EpsilonBinding::Radius => "radius",
                crate::regularity::EpsilonBinding::Slope => "slope",
            }),
    );
    cx.report.check(stage, "pairs", rep.pairs as f64, Relation::Eq, 1e4);
    cx.report.check(stage, "violations", rep.violations as f64, Relation::Eq, 0.0);

    let doubled = params.with_epsilon(2.0 * params.epsilon);
    let zetas = doubled.sample(100, &mut cx.rng);
    let rep = verify_embedding(&d, &chart, &xis, &doubled, &zetas)?;
    cx.report.record(Record::new(stage, "doubled_worst_margin", rep.worst_margin).constant("epsilon", doubled.epsilon));
    cx.report.check(stage, "doubled_violations", rep.violations as f64, Relation::Ge, 1.0);
    Ok(())
}

// ---------------------------------------------------------------- dichotomy-demo

fn dichotomy_table_rows(rep: &DichotomyReport) -> Vec<Vec<String>> {
    rep.rows.iter().map(DichotomyRow::csv_row).collect()
}

pub(super) fn dichotomy_demo(cx: &mut Ctx) -> Result<()> {
    let stage = cx.report.stage("distinct_limits");
    let seqs = ball_dichotomy_demo(20)?;
    let rep = dichotomy_report(&seqs, &ball(2), &ball(2))?;
    for r in &rep.rows {
        cx.report.record(
            Record::new(stage, "combined", r.combined)
                .input("nu", r.nu as f64)
                .constant("l", r.l)
                .constant("gap", r.gap)
                .constant("margin", r.margin),
        );
    }
    let growth = rep.rows[rep.rows.len() - 1].l - rep.rows[0].l;
    cx.report.record(
        Record::new(stage, "l_growth", growth)
            .constant("C", seqs.c)
            .constant("K", seqs.k)
            .constant("C0", seqs.c0),
    );
    cx.report.check(stage, "distinct", rep.distinct_limits as u8 as f64, Relation::Eq, 1.0);
    cx.report.check(stage, "l_nondecreasing", rep.l_nondecreasing as u8 as f64, Relation::Eq, 1.0);
    cx.report.check(stage, "l_growth", growth, Relation::Gt, 5.0);
    cx.report.check(
        stage,
        "failure_from",
        rep.failure_from.map_or(f64::INFINITY, |nu| nu as f64),
        Relation::Le,
        20.0,
    );
    cx.report.table(Table {
        name: "dichotomy_distinct".into(),
        header: DichotomyRow::csv_header(),
        rows: dichotomy_table_rows(&rep),
    });

    let stage = cx.report.stage("same_limit");
    let seqs = ex22_dichotomy_demo(20)?;
    let rep = dichotomy_report(&seqs, &ex22_d(), &crate::domains::ex22_omega())?;
    let growth = rep.rows[rep.rows.len() - 1].l - rep.rows[0].l;
    let negatives = count_where(&rep.rows, |r| r.combined < 0.0);
    cx.report.record(Record::new(stage, "l_growth", growth));
    cx.report.check(stage, "l_nondecreasing", rep.l_nondecreasing as u8 as f64, Relation::Eq, 1.0);
    cx.report.check(stage, "l_growth", growth, Relation::Gt, 0.0);
    cx.report.check(stage, "inconsistent_terms", negatives, Relation::Eq, 0.0);
    cx.report.table(Table {
        name: "dichotomy_same_limit".into(),
        header: DichotomyRow::csv_header(),
        rows: dichotomy_table_rows(&rep),
    });

    let stage = cx.report.stage("degenerate");
    let inp = DichotomyInput {
        delta_d: [0.1, 0.1],
        delta_omega: [0.1, 0.1],
        sep: 0.0,
    };
    let rep = dichotomy_table(&[inp; 10], 1.0, 0.0, 1.0, false)?;
    let drift = rep.rows.iter().map(|r| (r.l - rep.rows[0].l).abs()).fold(0.0, f64::max);
    cx.report.check(stage, "l_drift", drift, Relation::Eq, 0.0);
    Ok(())
}
