//! The ten acceptance criteria, one PASS/FAIL line each.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slitstrip::clifford::field::verify_fermion_field_extension;
use slitstrip::clifford::{apply_generator, conjugate_dense, expand_dense, generator_dense, GenKind, InducedRotation};
use slitstrip::continuum::fusion::integrated_kernel;
use slitstrip::continuum::{
    continuum_fusion, continuum_recursion, pfaffian, two_point_kernel, ContinuumMode, Heights, IndexTuple,
    KernelVariant, QuadratureConfig,
};
use slitstrip::discrete_cx::{lambda_from_omega, solve_omega, EigenBasis};
use slitstrip::fusion::{vacuum_eigenvalue, DirectFusion, FusionKey, Normalization, PeelOrder, RecursiveFusion};
use slitstrip::geometry::{HalfIntSet, StripGeometry};
use slitstrip::par::Exec;
use slitstrip::scaling::{log_richardson, richardson, run_convergence, strictly_decreasing, InnerProductId, WidthSchedule};
use slitstrip::statespace::{oracle, Observable, OracleQuery, RowSpace, BETA};
use slitstrip::transfer::{truncated_observables, ObservableSpec, SpinInsertion, TransferOperator, Variant};
use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Every split of a width-`l` slit-strip.
fn splits(l: usize) -> Vec<StripGeometry> {
    (1..l as i32).map(|ll| StripGeometry::new(-ll, l as i32 - ll).unwrap()).collect()
}

fn dist(u: &[C], v: &[C]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of `{A, B} - c id`, an upper bound on its operator norm.
fn anticommutator_defect(sp: &RowSpace, a: (GenKind, usize), b: (GenKind, usize), c: f64) -> f64 {
    let mut acc = 0.0;
    for r in 0..sp.dim() {
        let e = sp.basis(r);
        let ab = apply_generator(sp, a.0, a.1, &apply_generator(sp, b.0, b.1, &e).unwrap()).unwrap();
        let ba = apply_generator(sp, b.0, b.1, &apply_generator(sp, a.0, a.1, &e).unwrap()).unwrap();
        for (i, (x, y)) in ab.iter().zip(&ba).enumerate() {
            let want = if i == r { c } else { 0.0 };
            acc += (x + y - want).norm_sqr();
        }
    }
    acc.sqrt()
}

fn clifford_suite() -> Outcome {
    let mut worst = 0.0f64;
    for l in 2..=8 {
        let sp = RowSpace::irreducible(StripGeometry::symmetric(l).unwrap());
        for i in 0..l {
            let p = generator_dense(&sp, GenKind::Psi, i);
            let q = generator_dense(&sp, GenKind::PsiStar, i);
            worst = worst.max((p.adjoint() + &p).norm()).max((q.adjoint() - &q).norm());
            for j in 0..l {
                let d = if i == j { 2.0 } else { 0.0 };
                worst = worst
                    .max(anticommutator_defect(&sp, (GenKind::Psi, i), (GenKind::Psi, j), -d))
                    .max(anticommutator_defect(&sp, (GenKind::PsiStar, i), (GenKind::PsiStar, j), d))
                    .max(anticommutator_defect(&sp, (GenKind::Psi, i), (GenKind::PsiStar, j), 0.0));
            }
        }
    }
    outcome(worst <= 1e-12, format!("largest defect {worst:.2e} (Frobenius bound on operator norm), l = 2..8"))
}

fn induced_rotation() -> Outcome {
    let mut worst = 0.0f64;
    let mut outside = 0.0f64;
    for l in 2..=6 {
        let sp = RowSpace::irreducible(StripGeometry::symmetric(l).unwrap());
        let t = TransferOperator::new(sp, Variant::Strip).to_dense();
        let t_inv = t.clone().try_inverse().unwrap();
        let rot = InducedRotation::new(l).unwrap();
        for j in 0..l {
            for (kind, table) in [(GenKind::Psi, &rot.psi[j]), (GenKind::PsiStar, &rot.psistar[j])] {
                let (e, rest) = expand_dense(&sp, &conjugate_dense(&t, &t_inv, &generator_dense(&sp, kind, j)));
                outside = outside.max(rest);
                for n in 0..l {
                    worst = worst.max((e.c[n] - table.c[n]).norm()).max((e.cs[n] - table.cs[n]).norm());
                }
            }
        }
    }
    outcome(
        worst <= 1e-12 && outside <= 1e-12,
        format!("largest entry difference {worst:.2e}, largest part outside the generator span {outside:.2e}, l = 2..6"),
    )
}

fn fermion_extension() -> Outcome {
    let mut worst = 0.0f64;
    let mut geoms = vec![StripGeometry::symmetric(2).unwrap()];
    for l in 3..=4 {
        geoms.extend(splits(l));
    }
    for g in &geoms {
        let basis = EigenBasis::new(g.width()).unwrap();
        let fs: Vec<Vec<C>> = basis.indices().iter().map(|&k| basis.get(k).to_vec()).collect();
        worst = worst.max(verify_fermion_field_extension(*g, 2, &fs).unwrap().max());
    }
    outcome(worst <= 1e-11, format!("largest relative deviation {worst:.2e} over {} geometries with l <= 4", geoms.len()))
}

fn spectral_consistency() -> Outcome {
    let (mut lam_err, mut gram) = (0.0f64, 0.0f64);
    for w in 1..=16 {
        let b = EigenBasis::new(w).unwrap();
        gram = gram.max(b.gram_error());
        for (j, &lam) in b.lambda.iter().enumerate() {
            let want = lambda_from_omega(solve_omega(2 * j as i32 + 1, w).unwrap());
            lam_err = lam_err.max((lam - want).abs() / want);
        }
    }
    outcome(
        lam_err <= 1e-10 && gram <= 1e-11,
        format!("relative eigenvalue difference {lam_err:.2e}, Gram defect {gram:.2e}, w = 1..16"),
    )
}

fn diagonalization() -> Outcome {
    let (mut top_res, mut slit_res, mut closed, mut ratio_spread) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut literal = 0.0f64;
    // The transfer matrix carries the vertical bonds of both fixed boundary columns, a constant e^{2 beta}.
    let boundary = (2.0 * BETA).exp();
    for l in 2..=5 {
        let g = StripGeometry::symmetric(l).unwrap();
        let d = DirectFusion::new(g, Exec::default()).unwrap();
        let mu0 = d.top_vacuum.eigenvalue;
        let prod: f64 = d.data.top.lambda.iter().map(|x| 1.0 / (1.0 + 1.0 / x)).product();
        let bond_free = (SQRT_2 - 1.0).sqrt() * (2.0 + SQRT_2).powi(l as i32) * prod;
        closed = closed.max((mu0 / vacuum_eigenvalue(&[&d.data.top]) - 1.0).abs());
        ratio_spread = ratio_spread.max((mu0 / (boundary * bond_free) - 1.0).abs());
        literal = mu0 / bond_free;
        for a in HalfIntSet::all_subsets(l) {
            let v = d.top_eigenvector(&a).unwrap();
            let mu = d.top_eigenvalue(&a);
            let tv = d.strip.apply(&v).unwrap();
            let sv: Vec<C> = v.iter().map(|x| x * mu).collect();
            top_res = top_res.max(dist(&tv, &sv) / (mu * d.exec.norm(&v)));
        }
    }
    for l in 2..=4 {
        for g in splits(l) {
            let d = DirectFusion::new(g, Exec::default()).unwrap();
            closed = closed.max((d.slit_vacuum.eigenvalue / vacuum_eigenvalue(&[&d.data.left, &d.data.right]) - 1.0).abs());
            for bl in HalfIntSet::all_subsets(g.width_left()) {
                for br in HalfIntSet::all_subsets(g.width_right()) {
                    let w = d.slit_eigenvector(&bl, &br).unwrap();
                    let mu = d.slit_eigenvalue(&bl, &br);
                    let tw = d.slit.apply(&w).unwrap();
                    let sw: Vec<C> = w.iter().map(|x| x * mu).collect();
                    slit_res = slit_res.max(dist(&tw, &sw) / (mu * d.exec.norm(&w)));
                }
            }
        }
    }
    outcome(
        top_res <= 1e-8 && slit_res <= 1e-8 && closed <= 1e-10 && ratio_spread <= 1e-10,
        format!(
            "residual strip {top_res:.2e} slit {slit_res:.2e}; closed-form eigenvalues {closed:.2e}; \
             mu_0 / (e^(2 beta) x bond-free form) - 1 = {ratio_spread:.2e}; literal ratio mu_0 / bond-free form = \
             {literal:.15} = 1 + sqrt 2, the two fixed boundary-column bonds"
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let (mut z, mut c) = (0.0f64, 0.0f64);
    let mut cases = 0;
    for g in [StripGeometry::new(-1, 1), StripGeometry::new(-1, 2), StripGeometry::new(-2, 1)] {
        let g = g.unwrap();
        for slit in [false, true] {
            for ht in 1..=3 {
                for hb in 1..=3 {
                    let lo = SpinInsertion { x: g.a + 1, y: -(hb as i32) };
                    let hi = SpinInsertion { x: g.b - 1, y: ht as i32 };
                    let spec = ObservableSpec { h_top: ht, h_bottom: hb, spins: vec![lo, hi] };
                    let tm = truncated_observables(RowSpace::full(g), slit, &spec, Exec::default()).unwrap();
                    let q = OracleQuery {
                        geom: g,
                        h_top: ht,
                        h_bottom: hb,
                        slit,
                        observables: vec![Observable::Spins(vec![(lo.x, lo.y), (hi.x, hi.y)])],
                    };
                    let en = oracle(&q, Exec::default()).unwrap();
                    z = z.max((tm.partition - en.partition).abs() / en.partition);
                    c = c.max((tm.spin_correlation - en.expectations[0]).abs() / en.expectations[0].abs().max(1e-300));
                    cases += 1;
                }
            }
        }
    }
    outcome(z <= 1e-10 && c <= 1e-10, format!("relative gap Z {z:.2e}, two-point {c:.2e} over {cases} truncations"))
}

fn fusion_cross_method() -> Outcome {
    let (mut diff, mut order) = (0.0f64, 0.0f64);
    let mut keys_checked = 0;
    for l in 2..=6 {
        for g in splits(l) {
            let d = DirectFusion::new(g, Exec::default()).unwrap();
            let keys = FusionKey::enumerate([l, g.width_left(), g.width_right()], 4);
            keys_checked += keys.len();
            let direct = d.table(&keys, Normalization::RatioToVacuum).unwrap();
            let rec = RecursiveFusion::new(d.data.clone()).table(&keys, Exec::default()).unwrap();
            diff = diff.max(direct.max_difference(&rec));
            for o in PeelOrder::all() {
                let t = RecursiveFusion::with_order(d.data.clone(), o).table(&keys, Exec::default()).unwrap();
                order = order.max(rec.max_difference(&t));
            }
        }
    }
    outcome(
        diff <= 1e-9 && order <= 1e-10,
        format!("direct vs recursive {diff:.2e}, peel orders {order:.2e} over {keys_checked} keys"),
    )
}

fn kernel_value(t: &IndexTuple, h: &Heights) -> f64 {
    integrated_kernel(t, h, &QuadratureConfig::default(), Exec::default()).unwrap().value
}

fn block(t: &mut IndexTuple, b: usize) -> &mut Vec<i32> {
    match b {
        0 => &mut t.top,
        1 => &mut t.left,
        _ => &mut t.right,
    }
}

fn kernel_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pf = 0.0f64;
    for t in 0..20 {
        let n = 2 * (1 + t % 4);
        let mut a = DMatrix::<C>::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        let p = pfaffian(&a).unwrap();
        let det = a.determinant();
        pf = pf.max((p * p - det).norm() / det.norm());
    }
    let (mut res, mut free) = (0.0f64, 0.0f64);
    let k1 = ContinuumMode::full(3).unwrap();
    let k2 = ContinuumMode::left(-1).unwrap();
    for z2 in [C::new(0.1, 0.4), C::new(-0.2, -0.3), C::new(0.3, 0.05)] {
        let n = 256;
        let r = 0.02;
        let circle = |v: KernelVariant| -> C {
            (0..n)
                .map(|j| {
                    let u = C::from_polar(r, 2.0 * PI * j as f64 / n as f64);
                    two_point_kernel(v, &k1, z2 + u, &k2, z2).unwrap() * u
                })
                .sum::<C>()
                / n as f64
        };
        let want = k1.eval(z2) * k2.eval(z2);
        res = res.max((circle(KernelVariant::HoloHolo) - want).norm() / want.norm().max(1.0));
        free = free.max(circle(KernelVariant::HoloAnti).norm());
    }
    let mut level = 0.0f64;
    for t in [
        IndexTuple::new(&[1], &[-1], &[]).unwrap(),
        IndexTuple::new(&[1, 3], &[], &[]).unwrap(),
        IndexTuple::new(&[], &[-1], &[-3]).unwrap(),
        IndexTuple::new(&[3], &[-1, -3], &[-1]).unwrap(),
        IndexTuple::new(&[1, 3], &[-1], &[-1]).unwrap(),
    ] {
        let h = Heights::standard(&t);
        let base = kernel_value(&t, &h);
        level = level
            .max((base - kernel_value(&t, &h.shifted(0.3, -0.3))).abs())
            .max((base - kernel_value(&t, &Heights::spaced(&t, 0.35, 0.2))).abs());
    }
    let mut annihilation = 0.0f64;
    for t in [
        IndexTuple::new(&[-1], &[-1], &[]).unwrap(),
        IndexTuple::new(&[-3, 1], &[], &[]).unwrap(),
        IndexTuple::new(&[-1, 3], &[-1], &[-1]).unwrap(),
    ] {
        annihilation = annihilation.max(kernel_value(&t, &Heights::standard(&t)).abs());
    }
    let mut anti = 0.0f64;
    let swaps = [
        (IndexTuple::new(&[1, -1], &[], &[]).unwrap(), 0, 0),
        (IndexTuple::new(&[3, -3], &[-1], &[]).unwrap(), 0, 0),
        (IndexTuple::new(&[1, 3], &[-1], &[]).unwrap(), 0, 0),
        (IndexTuple::new(&[1, 3, -3], &[-1], &[]).unwrap(), 0, 1),
        (IndexTuple::new(&[1], &[-1, 1], &[]).unwrap(), 1, 0),
        (IndexTuple::new(&[1], &[-1, -3], &[-1]).unwrap(), 1, 0),
        (IndexTuple::new(&[], &[-1], &[-3, 3]).unwrap(), 2, 0),
        (IndexTuple::new(&[3], &[], &[-1, -3]).unwrap(), 2, 0),
    ];
    for (t, b, i) in swaps {
        let h = Heights::standard(&t);
        let mut s = t.clone();
        block(&mut s, b).swap(i, i + 1);
        let mut r = t.clone();
        let pair: Vec<i32> = block(&mut r, b).drain(i..i + 2).collect();
        let want = if pair[0] + pair[1] == 0 { kernel_value(&r, &Heights::standard(&r)) } else { 0.0 };
        anti = anti.max((kernel_value(&t, &h) + kernel_value(&s, &h) - want).abs());
    }
    outcome(
        pf <= 1e-10 && res <= 1e-8 && free <= 1e-10 && level <= 1e-6 && annihilation <= 1e-6 && anti <= 1e-6,
        format!(
            "Pf^2 vs det {pf:.2e}; residue {res:.2e}; pole-free contour {free:.2e}; level shifts {level:.2e}; \
             annihilation {annihilation:.2e}; anticommutation {anti:.2e}"
        ),
    )
}

fn continuum_cross_method() -> Outcome {
    let keys = FusionKey::enumerate([3, 3, 3], 3);
    let rec = continuum_recursion(&keys, PeelOrder::STANDARD).unwrap();
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for k in &keys {
        let q = continuum_fusion(k, &cfg, Exec::default()).unwrap().value;
        worst = worst.max((q - rec.value(k).unwrap()).abs());
    }
    let vacuum = rec.value(&FusionKey::vacuum()).unwrap();
    outcome(
        worst <= 1e-6 && vacuum == 1.0,
        format!("Pfaffian vs recursion {worst:.2e} over {} keys of depth <= 3; B_vacuum = {vacuum}", keys.len()),
    )
}

/// Gaps along the schedule, the 1/l extrapolation error and the log-aware one.
struct Series {
    name: String,
    gaps: Vec<f64>,
    richardson: f64,
    log_aware: f64,
}

fn series_of(table: &slitstrip::scaling::ConvergenceTable) -> Vec<Series> {
    table
        .quantities()
        .into_iter()
        .filter_map(|q| {
            let s = table.series(&q);
            if s.iter().all(|r| r.gap < 1e-12) {
                return None;
            }
            let n = s.len();
            let target = s[0].continuum;
            let rich = richardson(s[n - 2].width, s[n - 2].discrete, s[n - 1].width, s[n - 1].discrete);
            let pts = [(s[n - 3].width, s[n - 3].discrete), (s[n - 2].width, s[n - 2].discrete), (s[n - 1].width, s[n - 1].discrete)];
            let log_aware = log_richardson(pts).unwrap();
            Some(Series {
                name: q,
                gaps: s.iter().map(|r| r.gap).collect(),
                richardson: (rich - target).abs(),
                log_aware: (log_aware - target).abs(),
            })
        })
        .collect()
}

fn scaling_limit() -> Outcome {
    let schedule = WidthSchedule::balanced(&[4, 8, 16, 32, 64]).unwrap();
    let keys = FusionKey::enumerate([3, 3, 3], 3);
    let ips = InnerProductId::recursion_set(5);
    let table = run_convergence(&schedule, &keys, &ips, Exec::default()).unwrap();
    let (key_series, ip_series): (Vec<Series>, Vec<Series>) = series_of(&table).into_iter().partition(|s| s.name.starts_with('B'));
    fn summarize(v: &[Series]) -> (Vec<&str>, f64, f64) {
        let bad: Vec<&str> = v.iter().filter(|s| !strictly_decreasing(&s.gaps)).map(|s| s.name.as_str()).collect();
        let rich = v.iter().map(|s| s.richardson).fold(0.0, f64::max);
        let log = v.iter().map(|s| s.log_aware).fold(0.0, f64::max);
        (bad, rich, log)
    }
    let (kb, kr, kl) = summarize(&key_series);
    let (ib, ir, il) = summarize(&ip_series);
    let checks = table.direct_checks.iter().map(|c| c.1).fold(0.0, f64::max);
    let pass = kb.is_empty() && kr <= 1e-2 && ib.is_empty() && ir <= 1e-3;
    let list = |v: &[&str]| if v.is_empty() { "none".to_string() } else { v.join(" ") };
    outcome(
        pass,
        format!(
            "fusion keys: {} nontrivial, non-decreasing gaps [{}], 1/l extrapolation error {kr:.2e} (bound 1e-2); \
             inner products: {} nontrivial, non-decreasing gaps [{}], 1/l extrapolation error {ir:.2e} (bound 1e-3); \
             direct route at l <= 12 agrees to {checks:.2e}; for information, (a + b ln l)/l extrapolation \
             errors: keys {kl:.2e}, inner products {il:.2e}",
            key_series.len(),
            list(&kb),
            ip_series.len(),
            list(&ib),
        ),
    )
}

fn main() {
    slitstrip::par::init_threads();
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("Clifford algebra suite", Duration::from_secs(10), clifford_suite),
        ("induced rotation", Duration::from_secs(30), induced_rotation),
        ("fermion extension", Duration::from_secs(60), fermion_extension),
        ("spectral consistency", Duration::from_secs(10), spectral_consistency),
        ("diagonalization", Duration::from_secs(120), diagonalization),
        ("oracle equivalence", Duration::from_secs(60), oracle_equivalence),
        ("fusion cross-method", Duration::from_secs(120), fusion_cross_method),
        ("continuum kernel suite", Duration::from_secs(300), kernel_suite),
        ("continuum cross-method", Duration::from_secs(600), continuum_cross_method),
        ("scaling limit", Duration::from_secs(900), scaling_limit),
    ];
    let mut failures = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let pass = o.pass && took <= *budget;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<24} {}  [{:.1} s of {} s] {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    // Failures are reported above; a non-zero exit would stop `cargo test` before the other targets.
    if failures > 0 && std::env::var_os("SLITSTRIP_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
