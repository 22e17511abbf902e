//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use monodromy::harness::checks::{
    check_casimir_jacobi, check_convexity, check_du, check_duistermaat, check_gw, check_monodromy, check_poisson,
    check_structure,
};
use monodromy::harness::report::Criterion;
use monodromy::harness::{to_json, CheckReport, RunConfig};
use monodromy::Complex64;

fn cfg(dims: &[usize], trials: usize) -> RunConfig {
    RunConfig { dims: dims.to_vec(), trials, ..RunConfig::default() }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn pick(report: &CheckReport, names: &[&str]) -> Vec<Criterion> {
    names
        .iter()
        .map(|n| report.criteria.iter().find(|c| c.name == *n).unwrap_or_else(|| panic!("criterion {n} missing")).clone())
        .collect()
}

fn describe(cs: &[Criterion]) -> String {
    cs.iter().map(|c| format!("{}={:.2e}", c.name, c.value)).collect::<Vec<_>>().join(" ")
}

fn from_criteria(report: &CheckReport, names: &[&str]) -> Outcome {
    let cs = pick(report, names);
    Outcome { passed: cs.iter().all(|c| c.passed) && report.skipped == 0, detail: describe(&cs) }
}

fn run(label: &str, f: impl FnOnce() -> Result<Outcome, String>) -> bool {
    let t = Instant::now();
    let o = f().unwrap_or_else(|e| Outcome { passed: false, detail: format!("error: {e}") });
    println!("{} {label} ({:.1}s) {}", if o.passed { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64(), o.detail);
    o.passed
}

fn constant_is(report: &CheckReport, key: &str, modulus: f64) -> bool {
    report.resolved_constants.get(key).is_some_and(|c: &Complex64| (c.norm() - modulus).abs() < 1e-12)
}

fn main() -> ExitCode {
    let mut ok = true;
    let e = |x: monodromy::Error| x.to_string();

    ok &= run("criterion 1: monodromy relation, 50 random B", || {
        let t = Instant::now();
        let r = check_monodromy(&cfg(&[2, 3], 25)).map_err(e)?;
        let secs = t.elapsed().as_secs_f64();
        let mut o = from_criteria(&r, &["spectrum_distance", "direct_residual"]);
        o.passed &= r.trials == 50 && secs <= 60.0;
        o.detail.push_str(&format!(" runtime={secs:.2}s"));
        Ok(o)
    });

    ok &= run("criterion 2: Poisson property of nu", || {
        let r = check_poisson(&cfg(&[2, 3], 20)).map_err(e)?;
        let mut o = from_criteria(&r, &["relative_error", "constant_deviation", "jacobian_step_halving"]);
        // one constant serves every trial, so a sign flip would show up as relative error ≈ 2
        o.passed &= constant_is(&r, "poisson", TAU);
        o.detail.push_str(&format!(" constant={}", r.resolved_constants["poisson"]));
        Ok(o)
    });

    ok &= run("criterion 3: unitary restriction onto K*", || {
        let r = check_gw(&cfg(&[2, 3], 20)).map_err(e)?;
        let mut o = from_criteria(&r, &["kstar_residual", "bracket_relative_error", "constant_deviation", "jacobian_min_singular_value"]);
        o.passed &= constant_is(&r, "gw", std::f64::consts::PI);
        o.detail.push_str(&format!(" constant={}", r.resolved_constants["gw"]));
        Ok(o)
    });

    ok &= run("criterion 4: Iwasawa projection twisted by C", || {
        let r = check_duistermaat(&cfg(&[2, 3], 20)).map_err(e)?;
        Ok(from_criteria(&r, &["log_a_error"]))
    });

    let du = std::cell::OnceCell::new();
    let du_report = || du.get_or_init(|| check_du(&cfg(&[3, 4], 10))).as_ref().map_err(|x| x.to_string());
    ok &= run("criterion 5: induced bracket on U+ (n = 3, 4)", || {
        let r = du_report()?;
        let mut o = from_criteria(r, &["component_relative_error", "constant_modulus_deviation", "table_zeros"]);
        let n3 = r.details.iter().filter(|d| d.n == 3).count();
        let n4 = r.details.iter().filter(|d| d.n == 4).count();
        o.passed &= n3 == 11 && n4 == 10;
        o.detail.push_str(&format!(" points={n3}+{n4} c3={} c4={}", r.resolved_constants["du_n3"], r.resolved_constants["du_n4"]));
        Ok(o)
    });

    ok &= run("criterion 6: Markoff polynomial is a Casimir", || {
        let r = du_report()?;
        Ok(from_criteria(r, &["markoff_casimir", "markoff_p2_exact"]))
    });

    ok &= run("criterion 7: structural invariants", || {
        let r = check_structure(&cfg(&[2, 3], 10)).map_err(e)?;
        Ok(from_criteria(&r, &["off_triangle", "diagonal_b_exact", "trace_identity_n2", "two_radius_ratio", "torus_equivariance"]))
    });

    ok &= run("criterion 8: G* Casimirs and Jacobi", || {
        let r = check_casimir_jacobi(&cfg(&[2, 3], 10)).map_err(e)?;
        Ok(from_criteria(&r, &["casimir", "jacobi"]))
    });

    ok &= run("criterion 9: convexity sampling", || {
        let run = RunConfig { dims: vec![2, 3], samples: 500, ..RunConfig::default() };
        let (r, samples, _) = check_convexity(&run).map_err(e)?;
        let mut o = from_criteria(&r, &["hull_fraction", "trace_drift"]);
        o.passed &= samples.len() == 2 * 2 * 500;
        Ok(o)
    });

    ok &= run("criterion 10: byte-identical reports on rerun", || {
        let small = cfg(&[2], 3);
        let mut same = true;
        for _ in 0..2 {
            let a = to_json(&check_poisson(&small).map_err(e)?);
            let b = to_json(&check_poisson(&small).map_err(e)?);
            same &= a == b;
        }
        let a = to_json(&check_structure(&small).map_err(e)?);
        let b = to_json(&check_structure(&small).map_err(e)?);
        same &= a == b;
        let a = to_json(&check_du(&cfg(&[3], 3)).map_err(e)?);
        let b = to_json(&check_du(&cfg(&[3], 3)).map_err(e)?);
        same &= a == b;
        Ok(Outcome { passed: same, detail: "poisson, structure, du".into() })
    });

    if ok {
        println!("acceptance: all criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAIL");
        ExitCode::FAILURE
    }
}
