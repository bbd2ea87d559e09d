use braidtrack_core::branchlocus::{LineArrangement, Line};
use braidtrack_core::braid::Permutation;
use braidtrack_core::engine::*;
use braidtrack_core::homotopy::{initial_fiber, nearest_matching, track_path, TrackOptions};
use braidtrack_core::poly::{parse_multivariate, parse_poly, Complex};

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn run(src: &str, seed: u64) -> GroupReport {
    braid_generators(&parse_poly(src).unwrap(), &EngineOptions::seeded(seed)).unwrap()
}

fn is_three_cycle(p: &Permutation) -> bool {
    p.cycle_type() == vec![3]
}

#[test]
fn cusp_has_one_generator() {
    let r = run("z^3 - t^2", 1);
    assert_eq!(r.generators.len(), 1);
    let g = &r.generators[0];
    assert!(g.branch_point.norm() < 1e-8);
    assert_eq!(g.core.to_string(), "s2 s1 s2 s1");
    assert!(is_three_cycle(&g.perm));
    assert_eq!(g.perm, g.endpoint_perm);
    assert_eq!(r.monodromy, Monodromy { order: Some(3), transitive: true });
}

#[test]
fn two_branch_points() {
    let r = run("z^4 - 4*z^2 + 3 + t", 1);
    assert_eq!(r.generators.len(), 2);
    let (a, b) = (&r.generators[0], &r.generators[1]);
    assert!((a.branch_point - c(-3.0, 0.0)).norm() < 1e-8);
    assert!((b.branch_point - c(1.0, 0.0)).norm() < 1e-8);
    assert_eq!(a.core.to_string(), "s2");
    let core = b.core.to_string();
    assert!(core == "s1 s3" || core == "s3 s1", "{core}");
    assert_eq!(a.perm.cycle_type(), vec![2, 1, 1]);
    assert_eq!(b.perm.cycle_type(), vec![2, 2]);
}

#[test]
fn cusp_with_a_second_branch_point() {
    let r = run("z^3 - t^2*(1-t)", 1);
    assert_eq!(r.generators.len(), 2);
    assert_eq!(r.generators[0].core.len(), 4);
    assert_eq!(r.generators[1].core.len(), 2);
    assert!(r.generators.iter().all(|g| is_three_cycle(&g.perm)));
    let sums: Vec<i64> = r.generators.iter().map(|g| g.core.exponent_sum()).collect();
    assert!(sums == [4, 2] || sums == [-4, -2], "{sums:?}");
    assert_eq!(r.monodromy, Monodromy { order: Some(3), transitive: true });
}

#[test]
fn single_strand_has_no_generators() {
    let r = run("z", 1);
    assert_eq!(r.n, 1);
    assert!(r.generators.is_empty());
    assert_eq!(r.monodromy.order, Some(1));
}

#[test]
fn node_of_two_lines_is_a_full_twist() {
    let arr = LineArrangement::new(vec![
        Line { a: c(1.0, 0.0), b: c(-1.0, 0.0), c: c(0.0, 0.0) },
        Line { a: c(1.0, 0.0), b: c(1.0, 0.0), c: c(0.0, 0.0) },
    ])
    .unwrap();
    let opts = EngineOptions::seeded(3);
    let fast = arrangement_braid_generators(&arr, &opts).unwrap();
    assert_eq!(fast.generators.len(), 1);
    assert!(fast.generators[0].branch_point.norm() < 1e-8);
    assert_eq!(fast.generators[0].core.to_string(), "s1 s1");
    assert!(fast.generators[0].perm.is_identity());
    let slow = braid_generators(&arr.to_poly(), &opts).unwrap();
    assert_eq!(slow.generators.len(), 1);
    assert_eq!(slow.generators[0].core, fast.generators[0].core);
}

#[test]
fn restriction_by_substitution() {
    let big = parse_multivariate("z^3 - u*v", &["z", "u", "v"]).unwrap();
    let (f, _, _) = restrict_to_line(&big, Some(&[c(0.0, 0.0); 2]), Some(&[c(1.0, 0.0); 2]), 0).unwrap();
    assert_eq!(f, parse_poly("z^3 - t^2").unwrap());
    let big = parse_multivariate("z^2 - u", &["z", "u"]).unwrap();
    let (f, _, _) = restrict_to_line(&big, Some(&[c(0.0, 0.0)]), Some(&[c(1.0, 0.0)]), 0).unwrap();
    assert_eq!(f, parse_poly("z^2 - t").unwrap());
}

#[test]
fn restriction_rejects_bad_lines() {
    let big = parse_multivariate("u*z^2 + z - v", &["z", "u", "v"]).unwrap();
    let zero = [c(0.0, 0.0); 2];
    assert!(restrict_to_line(&big, Some(&zero), Some(&[c(1.0, 0.0); 2]), 0).is_ok());
    // u = 0 along the whole line kills the z^2 term
    let flat = restrict_to_line(&big, Some(&zero), Some(&[c(0.0, 0.0), c(1.0, 0.0)]), 0);
    assert!(matches!(flat, Err(EngineError::Restriction(_))));
    assert!(restrict_to_line(&big, None, Some(&zero), 0).is_err());
    assert!(restrict_to_line(&big, Some(&[c(0.0, 0.0)]), None, 0).is_err());
    let (f, u0, v) = restrict_to_line(&big, None, None, 5).unwrap();
    assert_eq!(f.degz(), 2);
    assert!(u0.iter().chain(&v).all(|x| x.norm() <= 2.0));
}

#[test]
fn generic_lines_agree_on_transitivity() {
    let big = parse_multivariate("z^3 + u*z^2 - v*z + u^2 - 2*v + 1", &["z", "u", "v"]).unwrap();
    let mut reports = Vec::new();
    for seed in [11, 12] {
        let (f, _, _) = restrict_to_line(&big, None, None, seed).unwrap();
        reports.push(braid_generators(&f, &EngineOptions::seeded(seed)).unwrap());
    }
    assert_eq!(reports[0].n, reports[1].n);
    assert_eq!(reports[0].monodromy.transitive, reports[1].monodromy.transitive);
    assert_eq!(reports[0].monodromy.order, reports[1].monodromy.order);
}

#[test]
fn lambda_keeps_cycle_types_and_exponent_sums() {
    for src in ["z^3 - t^2*(1-t)", "z^4 - 4*z^2 + 3 + t"] {
        let f = parse_poly(src).unwrap();
        let mut seen = Vec::new();
        for theta in [0.0, 1.1, 2.9] {
            let mut opts = EngineOptions::seeded(2);
            opts.lambda = Some(Complex::from_polar(1.0, theta));
            let r = braid_generators(&f, &opts).unwrap();
            let sig: Vec<(Vec<usize>, i64)> =
                r.generators.iter().map(|g| (g.perm.cycle_type(), g.word.exponent_sum())).collect();
            seen.push(sig);
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]), "{src}: {seen:?}");
    }
}

#[test]
fn big_loop_permutation_is_a_product_of_generators() {
    let f = parse_poly("z^3 - t^2*(1-t)").unwrap();
    let r = braid_generators(&f, &EngineOptions::seeded(4)).unwrap();
    // a counterclockwise circle through the base about both branch points
    let centre = c(0.5, 0.0);
    let radius = (r.base - centre).norm();
    let phi = (r.base - centre).arg();
    let mut vertices: Vec<Complex> = (0..16)
        .map(|k| centre + Complex::from_polar(radius, phi + 2.0 * std::f64::consts::PI * k as f64 / 16.0))
        .collect();
    vertices[0] = r.base;
    vertices.push(r.base);
    let opts = TrackOptions::default();
    let start = initial_fiber(&f, r.base, &opts).unwrap();
    let end = track_path(&f, &vertices, &start, &opts).unwrap();
    let mut image = vec![0; 3];
    for (j, &p) in nearest_matching(&end.points, &start.points).iter().enumerate() {
        image[p] = j + 1;
    }
    let big = Permutation::new(image).unwrap();
    let (a, b) = (&r.generators[0].perm, &r.generators[1].perm);
    assert!(big == a.then(b) || big == b.then(a), "{big} vs {a}, {b}");
}

#[test]
fn fresh_report_verifies_and_tampering_is_caught() {
    let f = parse_poly("z^3 - t^2").unwrap();
    let r = braid_generators(&f, &EngineOptions::seeded(1)).unwrap();
    let json = r.to_json();
    let topts = TrackOptions::default();
    assert!(verify_report(&f, &json, &topts).is_empty());

    let mut flipped = json.clone();
    let x = &mut flipped.generators[0].crossings[1];
    x.sign = -x.sign;
    assert!(!verify_report(&f, &flipped, &topts).is_empty());

    let mut moved = json.clone();
    moved.generators[0].crossings[0].s += 1e-2;
    let fails = verify_report(&f, &moved, &topts);
    assert!(fails.iter().any(|m| m.contains("residual")), "{fails:?}");
}

#[test]
fn reports_are_deterministic() {
    let f = parse_poly("z^4 - 4*z^2 + 3 + t").unwrap();
    let a = braid_generators(&f, &EngineOptions::seeded(9)).unwrap().to_json_string();
    let b = braid_generators(&f, &EngineOptions::seeded(9)).unwrap().to_json_string();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(v["generators"][0]["perm"].as_array().unwrap().len(), 4);
    assert!(v["lambda"].as_array().unwrap().len() == 2);
}

#[test]
fn bad_lambda_is_rejected() {
    let mut opts = EngineOptions::seeded(0);
    opts.lambda = Some(c(0.0, 0.0));
    let f = parse_poly("z^2 - t").unwrap();
    assert!(matches!(braid_generators(&f, &opts), Err(EngineError::Options(_))));
}

#[test]
fn symmetric_reducible_curve_exhausts_lambda() {
    // the roots are 0 and a pair ±w, so whenever the pair shares a real
    // part it shares it with 0 as well
    let f = parse_poly("z^3 - t*z").unwrap();
    let err = braid_generators(&f, &EngineOptions::seeded(1)).unwrap_err();
    assert!(err.is_lambda_exhaustion(), "{err}");
}
