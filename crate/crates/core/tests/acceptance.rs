//! Acceptance criteria, one PASS/FAIL line each.
//!
//! The run always completes and prints every line; set
//! `PVX_ACCEPTANCE_STRICT=1` to turn any FAIL into a test failure.
//! Run with `cargo test --release --test acceptance`.

mod common;

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use voronoi_extremes::cli;
use voronoi_extremes::distributions::{
    Family, FamilyParams, GGParams, TheoryCdf, gg_cdf, gg_moment, gg_sampler,
};
use voronoi_extremes::empirics::{EcdfAccumulator, ks_one_sample};
use voronoi_extremes::extremes::{Run2D, run_1d_experiment, run_2d_experiment};
use voronoi_extremes::fitting::{
    FitData, FitResult, fit_mle, log_likelihood_gradient, rank_families,
};
use voronoi_extremes::geometry::predicates::{incircle, orient2d};
use voronoi_extremes::geometry::{circumcenter, triangulate};
use voronoi_extremes::rng_ppp::{Point, PointSet2D, SimConfig1D, SimConfig2D};
use voronoi_extremes::special::{digamma, ln_gamma, reg_lower_gamma};

const R_MIN_REFERENCE: [f64; 3] = [2.176, 8.446, 4.005];
const R_MAX_REFERENCE: [f64; 3] = [1.719, 5.528, 9.482];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// The shared planar run and its GG fits.
struct Planar {
    run: Run2D,
    fit_min: FitResult,
    fit_max: FitResult,
    seconds: f64,
}

fn planar() -> Planar {
    let clock = Instant::now();
    let config = SimConfig2D {
        lambda: 1.0,
        area: 1e5,
        windows: 11,
        seed: 42,
        shards: 4,
    };
    let run = run_2d_experiment(&config).expect("planar run");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let (fit_min, fit_max) = pool.install(|| {
        (
            fit_mle(Family::GeneralizedGamma, FitData::Grouped(&run.r_min)).expect("r_min fit"),
            fit_mle(Family::GeneralizedGamma, FitData::Grouped(&run.r_max)).expect("r_max fit"),
        )
    });
    Planar {
        run,
        fit_min,
        fit_max,
        seconds: clock.elapsed().as_secs_f64(),
    }
}

fn c1_line_oracles() -> Outcome {
    let clock = Instant::now();
    let config = SimConfig1D {
        lambda: 1.0,
        length: 1.01e6,
        windows: 1,
        seed: 42,
        shards: 1,
    };
    let run = run_1d_experiment(&config).expect("line run");
    let secs = clock.elapsed().as_secs_f64();
    let r = &run.report;
    let pass = r.interior_points >= 1_000_000
        && r.sup_distance_min <= 0.003
        && r.sup_distance_max <= 0.003
        && secs <= 30.0;
    outcome(
        pass,
        format!(
            "n = {}, sup|F_min| = {:.5}, sup|F_max| = {:.5} (limit 0.003), {secs:.1} s single-threaded",
            r.interior_points, r.sup_distance_min, r.sup_distance_max
        ),
    )
}

fn c2_vertex_oracle(p: &Planar) -> Outcome {
    let acc = &p.run.r_bar;
    let d = ks_one_sample(acc, |r| TheoryCdf::Vertex2d.eval(r).unwrap()).unwrap();
    outcome(
        acc.n >= 1_000_000 && d <= 0.005,
        format!("n = {}, sup distance {d:.5} (limit 0.005)", acc.n),
    )
}

fn rel_dev(got: &[f64], want: &[f64]) -> Vec<f64> {
    got.iter().zip(want).map(|(g, w)| g / w - 1.0).collect()
}

fn c3_table_parameters(p: &Planar) -> Outcome {
    let dmin = rel_dev(&p.fit_min.params.values(), &R_MIN_REFERENCE);
    let dmax = rel_dev(&p.fit_max.params.values(), &R_MAX_REFERENCE);
    let within = |d: &[f64]| d.iter().all(|x| x.abs() <= 0.03);
    let cells = p.run.report.interior_cells;
    let pass = cells >= 1_000_000 && within(&dmin) && within(&dmax) && p.seconds <= 900.0;
    let fmt = |v: Vec<f64>, d: &[f64]| {
        v.iter()
            .zip(d)
            .map(|(x, e)| format!("{x:.3} ({:+.1}%)", 100.0 * e))
            .collect::<Vec<_>>()
            .join(", ")
    };
    outcome(
        pass,
        format!(
            "{cells} cells; r_min ({}); r_max ({}); {:.1} s",
            fmt(p.fit_min.params.values(), &dmin),
            fmt(p.fit_max.params.values(), &dmax),
            p.seconds
        ),
    )
}

fn gg(fit: &FitResult) -> GGParams {
    match fit.params {
        FamilyParams::GeneralizedGamma(g) => g,
        _ => unreachable!(),
    }
}

fn c4_moments(p: &Planar) -> Outcome {
    let (min1, min2) = p.run.r_min.moments().unwrap();
    let (max1, max2) = p.run.r_max.moments().unwrap();
    let sample_ok = (min1 - 0.464162).abs() <= 0.005
        && (max1 - 0.976030).abs() <= 0.005
        && (min2 - 0.241833).abs() <= 0.01
        && (max2 - 1.011695).abs() <= 0.01;
    let mut worst: f64 = 0.0;
    for (fit, m) in [(&p.fit_min, [min1, min2]), (&p.fit_max, [max1, max2])] {
        for (k, sample) in m.iter().enumerate() {
            let formula = gg_moment(k as f64 + 1.0, gg(fit)).unwrap();
            worst = worst.max((formula / sample - 1.0).abs());
        }
    }
    outcome(
        sample_ok && worst <= 0.01,
        format!(
            "r_min ({min1:.6}, {min2:.6}), r_max ({max1:.6}, {max2:.6}); fitted-formula vs sample worst {:.3}%",
            100.0 * worst
        ),
    )
}

fn c5_ordering(p: &Planar) -> Outcome {
    let order = |acc: &EcdfAccumulator| -> Vec<Family> {
        rank_families(acc)
            .unwrap()
            .iter()
            .map(|r| r.family)
            .collect()
    };
    let (omin, omax) = (order(&p.run.r_min), order(&p.run.r_max));
    let table = [
        Family::GeneralizedGamma,
        Family::Weibull,
        Family::Gamma,
        Family::LogNormal,
        Family::Rayleigh,
    ];
    let ends = |o: &[Family]| {
        o.first() == Some(&Family::GeneralizedGamma) && o.last() == Some(&Family::Rayleigh)
    };
    let tags = |o: &[Family]| o.iter().map(|f| f.tag()).collect::<Vec<_>>().join(" < ");
    outcome(
        ends(&omin) && ends(&omax) && omin == table,
        format!("r_min: {}; r_max: {}", tags(&omin), tags(&omax)),
    )
}

fn c6_special_functions() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    for (x, want) in [
        (171.5, 709.143_163_030_928_2),
        (0.5, 0.572_364_942_924_700_1),
        (0.001, 6.907_178_885_383_854),
        (5.0, 24f64.ln()),
    ] {
        worst_rel = worst_rel.max(common::rel_err(ln_gamma(x).unwrap(), want));
    }
    let mut worst_abs: f64 = 0.0;
    for (x, want) in [
        (1.0, -0.577_215_664_901_532_9),
        (0.25, -4.227_453_533_376_265),
        (7.5, 1.946_757_484_246_086_8),
    ] {
        worst_abs = worst_abs.max((digamma(x).unwrap() - want).abs());
    }
    for (s, x, want) in [
        (4.36, 1.7, 0.062_940_636_522_656_08),
        (100.0, 90.0, 0.158_220_989_186_430_17),
    ] {
        worst_abs = worst_abs.max((reg_lower_gamma(s, x).unwrap() - want).abs());
    }
    let norm = ln_gamma(4.36).unwrap();
    let density = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            (3.36 * t.ln() - t - norm).exp()
        }
    };
    worst_abs = worst_abs.max(
        (reg_lower_gamma(4.36, 1.7).unwrap() - common::integrate(&density, 0.0, 1.7, 1e-15)).abs(),
    );
    let vertex = GGParams::vertex_distance();
    let mut eq4: f64 = 0.0;
    for i in 0..1000 {
        let r = 3.0 * i as f64 / 999.0;
        let u = std::f64::consts::PI * r * r;
        eq4 = eq4.max((gg_cdf(r, vertex).unwrap() - (1.0 - (1.0 + u) * (-u).exp())).abs());
    }
    outcome(
        worst_rel <= 1e-12 && worst_abs <= 1e-10 && eq4 <= 1e-10,
        format!(
            "lnΓ worst rel {worst_rel:.1e}; ψ and P worst abs {worst_abs:.1e}; GG(2,π,4) vs closed form {eq4:.1e}"
        ),
    )
}

fn hull_boundary_count(pts: &[Point]) -> usize {
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut hull: Vec<Point> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let seq: Vec<Point> = if pass == 0 {
            sorted.clone()
        } else {
            sorted.iter().rev().copied().collect()
        };
        for p in seq {
            while hull.len() >= start + 2
                && orient2d(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    pts.iter()
        .filter(|&&p| {
            (0..hull.len()).any(|i| {
                let (u, v) = (hull[i], hull[(i + 1) % hull.len()]);
                orient2d(u, v, p) == 0.0
                    && p.x >= u.x.min(v.x)
                    && p.x <= u.x.max(v.x)
                    && p.y >= u.y.min(v.y)
                    && p.y <= u.y.max(v.y)
            })
        })
        .count()
}

fn c7_geometry(p: &Planar) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut delaunay_bad, mut euler_bad) = (0, 0);
    for _ in 0..500 {
        let n = rng.random_range(4..=200);
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let tri = triangulate(PointSet2D::new(pts.clone())).unwrap();
        let empty = tri.triangles.iter().all(|&[a, b, c]| {
            (0..n as u32).all(|q| {
                q == a
                    || q == b
                    || q == c
                    || incircle(tri.point(a), tri.point(b), tri.point(c), tri.point(q)) <= 0.0
            })
        });
        delaunay_bad += usize::from(!empty);
        euler_bad += usize::from(tri.triangles.len() != 2 * n - 2 - hull_boundary_count(&pts));
    }
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < 10_000 {
        let t: [Point; 3] = std::array::from_fn(|_| {
            Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        if orient2d(t[0], t[1], t[2]).abs() < 1e-6 {
            continue;
        }
        let c = circumcenter(t[0], t[1], t[2]).unwrap();
        let d = t.map(|q| c.dist(q));
        worst = worst.max((d[0] - d[1]).abs().max((d[0] - d[2]).abs()) / d[0]);
        tested += 1;
    }
    let rep = &p.run.report;
    let pass = delaunay_bad == 0
        && euler_bad == 0
        && worst <= 1e-10
        && rep.interior_cells >= 100_000
        && (rep.mean_vertex_count - 6.0).abs() <= 0.05;
    outcome(
        pass,
        format!(
            "500 sets: {delaunay_bad} empty-circle and {euler_bad} Euler failures; circumcenter spread {worst:.1e}; mean vertices {:.4} over {} cells",
            rep.mean_vertex_count, rep.interior_cells
        ),
    )
}

fn c8_statistics(p: &Planar) -> Outcome {
    let truth = GGParams::new(R_MIN_REFERENCE[0], R_MIN_REFERENCE[1], R_MIN_REFERENCE[2]).unwrap();
    let sampler = gg_sampler(truth).unwrap();
    let mut covered = [0usize; 3];
    let mut nesting_bad = 0;
    let mut reps = 0;
    let nests = |data: FitData<'_>, gg_ll: f64| -> bool {
        [Family::Gamma, Family::Weibull]
            .iter()
            .all(|&f| match fit_mle(f, data) {
                Ok(sub) => gg_ll >= sub.log_likelihood - 1e-9 * sub.log_likelihood.abs(),
                Err(_) => true,
            })
    };
    for rep in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + rep);
        let mut acc = EcdfAccumulator::with_upper(1.5).unwrap();
        for _ in 0..100_000 {
            acc.add(sampler.sample(&mut rng)).unwrap();
        }
        let Ok(fit) = fit_mle(Family::GeneralizedGamma, FitData::Grouped(&acc)) else {
            continue;
        };
        reps += 1;
        if let Some(ci) = &fit.ci {
            for (k, iv) in ci.iter().enumerate() {
                covered[k] += usize::from(
                    iv.lower <= truth_value(truth, k) && truth_value(truth, k) <= iv.upper,
                );
            }
        }
        nesting_bad += usize::from(!nests(FitData::Grouped(&acc), fit.log_likelihood));
    }
    for (acc, fit) in [(&p.run.r_min, &p.fit_min), (&p.run.r_max, &p.fit_max)] {
        nesting_bad += usize::from(!nests(FitData::Grouped(acc), fit.log_likelihood));
    }

    let mut worst_grad: f64 = 0.0;
    let raw: Vec<f64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        (0..20_000).map(|_| sampler.sample(&mut rng)).collect()
    };
    let starts = [
        FamilyParams::GeneralizedGamma(GGParams::new(1.9, 7.0, 4.6).unwrap()),
        FamilyParams::Gamma {
            shape: 6.0,
            rate: 14.0,
        },
        FamilyParams::Weibull {
            shape: 2.7,
            scale: 0.55,
        },
        FamilyParams::LogNormal {
            mu: -0.7,
            sigma: 0.45,
        },
        FamilyParams::Rayleigh { sigma: 0.4 },
    ];
    for data in [FitData::Grouped(&p.run.r_min), FitData::Raw(&raw)] {
        for params in &starts {
            let (_, grad) = log_likelihood_gradient(data, params).unwrap();
            let v = params.values();
            let fd: Vec<f64> = (0..v.len())
                .map(|i| {
                    let h = 1e-6 * v[i].abs();
                    let at = |d: f64| {
                        let mut w = v.clone();
                        w[i] += d;
                        log_likelihood_gradient(
                            data,
                            &FamilyParams::from_values(params.family(), &w).unwrap(),
                        )
                        .unwrap()
                        .0
                    };
                    (at(h) - at(-h)) / (2.0 * h)
                })
                .collect();
            let num = grad
                .iter()
                .zip(&fd)
                .map(|(g, f)| (g - f).powi(2))
                .sum::<f64>()
                .sqrt();
            let den = fd.iter().map(|f| f * f).sum::<f64>().sqrt();
            worst_grad = worst_grad.max(num / den);
        }
    }
    let pass =
        reps == 100 && covered.iter().all(|&c| c >= 90) && nesting_bad == 0 && worst_grad <= 1e-5;
    outcome(
        pass,
        format!(
            "CI coverage (a, b, c) = {covered:?} of {reps}; {nesting_bad} nesting violations; gradient vs finite difference worst rel {worst_grad:.1e}"
        ),
    )
}

fn truth_value(p: GGParams, k: usize) -> f64 {
    [p.a, p.b, p.c][k]
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for shards in ["1", "4", "8"] {
        let mut files = Vec::new();
        for (cmd, extra) in [
            ("simulate-2d", ["--area", "2e4", "--windows", "6"]),
            ("simulate-1d", ["--length", "2e5", "--windows", "3"]),
        ] {
            let dir = tmp.path().join(format!("{cmd}-{shards}"));
            let mut args = vec![
                "pvx",
                cmd,
                "--seed",
                "42",
                "--shards",
                shards,
                "--raw-pairs",
                "--out-dir",
                dir.to_str().unwrap(),
            ];
            if cmd == "simulate-1d" {
                args.retain(|a| *a != "--raw-pairs");
            }
            args.extend(extra);
            assert_eq!(cli::run(args, &mut Vec::new()), 0);
            let mut names: Vec<_> = std::fs::read_dir(&dir)
                .unwrap()
                .map(|e| e.unwrap().file_name())
                .collect();
            names.sort();
            for name in names.into_iter().filter(|n| n != "manifest.json") {
                files.push((
                    format!("{cmd}/{}", name.to_string_lossy()),
                    std::fs::read(dir.join(&name)).unwrap(),
                ));
            }
        }
        snapshots.push(files);
    }
    let same = snapshots.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "{} data files compared across shard counts 1, 4, 8",
            snapshots[0].len()
        ),
    )
}

#[test]
fn acceptance() {
    let p = planar();
    let results = [
        ("1", "1D exact oracles", c1_line_oracles()),
        ("2", "2D vertex-distance oracle", c2_vertex_oracle(&p)),
        ("3", "GG parameters at desk scale", c3_table_parameters(&p)),
        ("4", "moments", c4_moments(&p)),
        ("5", "family ordering", c5_ordering(&p)),
        ("6", "special-function accuracy", c6_special_functions()),
        ("7", "geometry property suite", c7_geometry(&p)),
        ("8", "statistical method suite", c8_statistics(&p)),
        ("9", "determinism across shards", c9_determinism()),
    ];
    // written past the test harness capture so the lines always show
    let mut err = std::io::stderr().lock();
    let mut failed = Vec::new();
    for (id, name, o) in &results {
        writeln!(
            err,
            "{} criterion {id} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        )
        .unwrap();
        if !o.pass {
            failed.push(*id);
        }
    }
    writeln!(
        err,
        "{} of {} criteria pass",
        results.len() - failed.len(),
        results.len()
    )
    .unwrap();
    if std::env::var_os("PVX_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        assert!(failed.is_empty(), "failing criteria: {failed:?}");
    }
}
