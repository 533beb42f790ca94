//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! hard failure. Run with `cargo test -p mpmm-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use mpmm_core::bench::{cmd_opcount, parse_sizes, TableFormat};
use mpmm_core::blocklu::{factorize, LuStrategy};
use mpmm_core::densemat::max_rel_error_mat;
use mpmm_core::fastmm::{fast_mul_traced, LevelWorkspace};
use mpmm_core::matgen::{bench_oracle_matrix, gen_bench_pair, gen_linear_system, gen_lotkin, gen_random, Prng64};
use mpmm_core::opmodel::{ratio_to_f64, ComplexityRow};
use mpmm_core::{
    cond_one, count_fast, count_simple, fast_mul, max_rel_error_solution, multiply, BlockLUConfig, Error,
    FastAlgorithm, FastMMConfig, MPMatrix, MulKernel, OddDimPolicy, PrecisionContext,
};
use rug::Float;

type Outcome = Result<String, String>;

fn ctx(bits: u32) -> PrecisionContext {
    PrecisionContext::new(bits).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn c1_oracle_equivalence() -> Outcome {
    let c = ctx(256);
    let mut rng = Prng64::new(20_240_601);
    let mut max_dim = 0;
    for case in 0..200 {
        let [m, l, n] = [0; 3].map(|_| 1 + (rng.next_u64() % 96) as usize);
        let n_min = [1, 8, 32][case % 3];
        let a = common::int_matrix(&mut rng, m, l, 1024);
        let b = common::int_matrix(&mut rng, l, n, 1024);
        let exact = common::int_product(&a, &b);
        let (am, bm) = (common::to_mp(&a, c), common::to_mp(&b, c));
        let (reference, _) = multiply(MulKernel::Simple, &am, &bm, n_min, c).unwrap();
        for i in 0..m {
            for j in 0..n {
                ensure(reference[(i, j)].as_float() == &exact[i][j], || format!("case {case}: simple inexact at ({i},{j})"))?;
            }
        }
        for kernel in [MulKernel::Block, MulKernel::Strassen, MulKernel::Winograd] {
            let (p, _) = multiply(kernel, &am, &bm, n_min, c).unwrap();
            ensure(p.bit_eq(&reference), || format!("case {case}: {kernel} differs for {m}x{l}x{n}, n_min={n_min}"))?;
        }
        max_dim = max_dim.max(m.max(l).max(n));
    }
    Ok(format!("200 cases, dims up to {max_dim}, all four kernels bit-identical and equal to the exact product"))
}

fn c2_worked_traces() -> Outcome {
    let c = ctx(128);
    let a = MPMatrix::from_i64_rows(&[vec![1, 2], vec![3, 4]], c).unwrap();
    let b = MPMatrix::from_i64_rows(&[vec![5, 6], vec![7, 8]], c).unwrap();
    let ints = |m: &MPMatrix| m.elements().iter().map(|e| e.to_f64() as i64).collect::<Vec<_>>();
    let all = |ms: &[MPMatrix]| ms.iter().flat_map(ints).collect::<Vec<_>>();

    let cfg = FastMMConfig::new(FastAlgorithm::Strassen, 1).unwrap();
    let (cs, _, ws) = fast_mul_traced(&a, &b, cfg, c).unwrap();
    let LevelWorkspace::Strassen(ws) = ws else { return Err("wrong workspace".into()) };
    ensure(all(&ws.p) == [65, 35, -2, 8, 24, 22, -30], || format!("P = {:?}", all(&ws.p)))?;
    ensure(ints(&cs) == [19, 22, 43, 50], || format!("Strassen C = {:?}", ints(&cs)))?;

    let cfg = FastMMConfig::new(FastAlgorithm::Winograd, 1).unwrap();
    let (cw, _, ws) = fast_mul_traced(&a, &b, cfg, c).unwrap();
    let LevelWorkspace::Winograd(ws) = ws else { return Err("wrong workspace".into()) };
    ensure(all(&ws.s) == [7, 6, -2, -4, 1, 7, 2, 0], || format!("S = {:?}", all(&ws.s)))?;
    ensure(all(&ws.m) == [42, 5, 14, -4, 7, -32, 0], || format!("M = {:?}", all(&ws.m)))?;
    ensure(ints(&ws.t1) == [47] && ints(&ws.t2) == [43], || "T1/T2 mismatch".into())?;
    ensure(ints(&cw) == [19, 22, 43, 50], || format!("Winograd C = {:?}", ints(&cw)))?;
    Ok("P1..P7, S1..S8, M1..M7, T1, T2 and C reproduced".into())
}

fn c3_table_ratios() -> Outcome {
    let rounded = |size: usize| {
        let r = ComplexityRow::new(size, size, size, 32);
        let v = ratio_to_f64(&r.strassen_mul_ratio);
        ((v * 1000.0).round() / 1000.0, v)
    };
    let mut report = Vec::new();
    for (size, expect) in [(256, 0.670), (512, 0.586), (1024, 0.513), (2048, 0.449)] {
        let (r, _) = rounded(size);
        ensure((r - expect).abs() <= 0.0005, || format!("{size}: {r:.3} vs {expect}"))?;
        report.push(format!("{size}:{r:.3}"));
    }
    for (size, expect) in [(255, 0.678), (511, 0.590), (1023, 0.514), (2047, 0.449)] {
        let (r, _) = rounded(size);
        ensure((r - expect).abs() <= 0.002, || format!("{size}: {r:.3} vs {expect}"))?;
        report.push(format!("{size}:{r:.3}"));
    }
    for (size, expect) in [(257, 0.674), (513, 0.589), (1025, 0.514), (2049, 0.450)] {
        let (_, v) = rounded(size);
        let dev = (v - expect).abs() / expect;
        ensure(dev <= 0.035, || format!("{size}: {v:.4} vs {expect} ({:.1}% off)", dev * 100.0))?;
        report.push(format!("{size}:{v:.3}"));
    }
    Ok(report.join(" "))
}

fn c4_counter_model() -> Outcome {
    let c = ctx(64);
    let shapes = [(255, 255, 255), (256, 256, 256), (512, 512, 512), (1024, 63, 1024), (97, 41, 66)];
    let mut checked = 0;
    for &(m, l, n) in &shapes {
        // small integer entries keep the products exact at 64 bits
        let a = MPMatrix::from_fn(m, l, c, |i, j| c.from_i64(((i * 3 + j) % 5) as i64 - 2)).unwrap();
        let b = MPMatrix::from_fn(l, n, c, |i, j| c.from_i64(((i + 7 * j) % 3) as i64 - 1)).unwrap();
        for n_min in [16, 32] {
            for algorithm in [FastAlgorithm::Strassen, FastAlgorithm::Winograd] {
                let cfg = FastMMConfig::new(algorithm, n_min).unwrap();
                let (_, counted) = fast_mul(&a, &b, cfg, c).unwrap();
                let model = count_fast(algorithm, m, l, n, n_min);
                ensure(counted == model, || format!("{algorithm} {m}x{l}x{n} n_min={n_min}: {counted:?} vs {model:?}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} instrumented runs equal the model exactly"))
}

fn c5_structure() -> Outcome {
    let mut splits = 0;
    for policy in [OddDimPolicy::PadOrPeel, OddDimPolicy::PadOnly] {
        for m in (1..=80).step_by(3) {
            for l in (1..=80).step_by(5) {
                for n in (1..=80).step_by(7) {
                    for n_min in [1, 4, 16] {
                        let s = mpmm_core::count_fast_with_policy(FastAlgorithm::Strassen, policy, m, l, n, n_min);
                        let w = mpmm_core::count_fast_with_policy(FastAlgorithm::Winograd, policy, m, l, n, n_min);
                        ensure(s.mul == w.mul, || format!("mul differs at {m}x{l}x{n}"))?;
                        if m.min(l).min(n) > n_min {
                            splits += 1;
                            ensure(w.addsub < s.addsub, || format!("addsub not smaller at {m}x{l}x{n}"))?;
                        } else {
                            ensure(s == count_simple(m, l, n) && w == s, || format!("base case mismatch at {m}x{l}x{n}"))?;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("mul counts equal everywhere; Winograd add/sub smaller on all {splits} split shapes"))
}

fn c6_accuracy_bands() -> Outcome {
    let n = 256;
    let mut report = Vec::new();
    for (bits, simple_bound, fast_bound) in [(128u32, 1e-36, 1e-34), (1024, 1e-300, 1e-300)] {
        let c = ctx(bits);
        let (a, b) = gen_bench_pair(n, n, n, c).unwrap();
        let oracle = bench_oracle_matrix(n, n, n, ctx(2 * bits + 64)).unwrap();
        for kernel in MulKernel::ALL {
            let (p, _) = multiply(kernel, &a, &b, 32, c).unwrap();
            let err = max_rel_error_mat(&p, &oracle).unwrap().max.log10_abs();
            let bound: f64 = if matches!(kernel, MulKernel::Simple | MulKernel::Block) { simple_bound } else { fast_bound };
            ensure(err <= bound.log10(), || format!("{kernel} at {bits} bits: 1e{err:.2} > {bound:e}"))?;
            report.push(format!("{kernel}@{bits}=1e{err:.1}"));
        }
    }
    Ok(report.join(" "))
}

fn c7_blocked_lu() -> Outcome {
    let c = ctx(256);
    let a = gen_random(128, 128, 1, c).unwrap();
    let (x_true, b) = gen_linear_system(&a, c).unwrap();
    let err_of = |strategy| {
        let x = factorize(&a, strategy, c).and_then(|f| f.solve(&b, c)).map_err(|e| e.to_string())?;
        Ok::<f64, String>(max_rel_error_solution(&x, &x_true).unwrap().max_rel.log10_abs())
    };
    let base = err_of(LuStrategy::Columnwise)?;
    let mut report = vec![format!("columnwise=1e{base:.1}")];
    for alpha in [1, 2, 4] {
        let cfg = BlockLUConfig::from_alpha(alpha, 32, MulKernel::Winograd).unwrap();
        let e = err_of(LuStrategy::Blocked(cfg))?;
        ensure(e - base <= 4.0, || format!("alpha={alpha}: loses {:.2} digits", e - base))?;
        report.push(format!("alpha{alpha}=1e{e:.1}"));
    }
    Ok(report.join(" "))
}

fn c8_lotkin() -> Outcome {
    let n = 16;
    let exact = common::lotkin_cond_exact(n);
    let c = ctx(1024);
    let kappa = cond_one(&gen_lotkin(n, c).unwrap(), c).map_err(|e| e.to_string())?;
    let oracle = Float::with_val(1024, &exact);
    let rel = (Float::with_val(1024, kappa.as_float() - &oracle) / &oracle).abs();
    let three = |f: &Float| f.to_string_radix(10, Some(3));
    ensure(three(kappa.as_float()) == three(&oracle), || {
        format!("cond {} vs oracle {}", three(kappa.as_float()), three(&oracle))
    })?;

    // ceil(log2 kappa) from the exact value
    let log2k = {
        let f = Float::with_val(256, &exact);
        f.log2().ceil().to_f64() as u32
    };
    let solve_err = |bits: u32| -> Result<Option<f64>, String> {
        let c = ctx(bits);
        let a = gen_lotkin(n, c).unwrap();
        let (x_true, b) = gen_linear_system(&a, c).unwrap();
        match factorize(&a, LuStrategy::Columnwise, c).and_then(|f| f.solve(&b, c)) {
            Ok(x) => Ok(Some(max_rel_error_solution(&x, &x_true).unwrap().max_rel.log10_abs())),
            Err(Error::SingularPivot { .. }) => Ok(None),
            Err(e) => Err(e.to_string()),
        }
    };
    let hi = solve_err(log2k + 128)?.ok_or("singular at high precision")?;
    ensure(hi <= -30.0, || format!("error 1e{hi:.1} at {} bits", log2k + 128))?;
    let lo = solve_err(log2k - 64)?;
    ensure(lo.is_none_or(|e| e >= -2.0), || format!("error 1e{:.1} at {} bits", lo.unwrap(), log2k - 64))?;
    Ok(format!(
        "kappa={} (rel diff {:.1e}), {}b err=1e{hi:.1}, {}b {}",
        three(&oracle),
        rel.to_f64(),
        log2k + 128,
        log2k - 64,
        lo.map_or("SINGULAR".to_string(), |e| format!("err=1e{e:.1}"))
    ))
}

fn c9_performance() -> Outcome {
    let n = 512;
    let c = ctx(1024);
    let (a, b) = gen_bench_pair(n, n, n, c).unwrap();
    let mut t = Vec::new();
    for kernel in MulKernel::ALL {
        let start = Instant::now();
        let _ = multiply(kernel, &a, &b, 32, c).unwrap();
        t.push(start.elapsed().as_secs_f64());
    }
    let line = format!("simple {:.2}s block {:.2}s strassen {:.2}s winograd {:.2}s", t[0], t[1], t[2], t[3]);
    if t[3] < t[2] && t[2] < t[0].min(t[1]) {
        Ok(format!("{line} (ordering holds)"))
    } else {
        Err(format!("{line} (ordering differs; informative only)"))
    }
}

fn c10_table_layout() -> Outcome {
    let sizes = parse_sizes("255..2049").map_err(|e| e.to_string())?;
    let text = cmd_opcount(&sizes, 32, TableFormat::Table).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = text.lines().collect();
    ensure(lines.iter().any(|l| l.contains("Strassen") && l.contains("Winograd")), || "missing group header".into())?;
    ensure(lines.iter().any(|l| l.contains("n_min = 32") && l.matches("Add & Sub").count() == 2 && l.matches("Mul").count() == 2), || {
        "missing column header".into()
    })?;
    let body: Vec<&str> = lines.iter().copied().filter(|l| l.contains(" x ")).collect();
    ensure(body.len() == 12, || format!("{} rows", body.len()))?;
    for (line, &size) in body.iter().zip(&sizes) {
        let (label, rest) = line.split_once('|').ok_or("row without separator")?;
        ensure(label.trim() == format!("{size} x {size}"), || format!("label {label:?}"))?;
        let cells: Vec<&str> = rest.split(|ch: char| ch == '|' || ch.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let expect = ComplexityRow::new(size, size, size, 32).display_ratios();
        ensure(cells == expect, || format!("{size}: {cells:?} vs {expect:?}"))?;
    }
    Ok("12 rows, Strassen/Winograd groups with Add & Sub and Mul columns".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, bool); 10] = [
        ("1 oracle equivalence", c1_oracle_equivalence, true),
        ("2 worked 2x2 traces", c2_worked_traces, true),
        ("3 table multiplication ratios", c3_table_ratios, true),
        ("4 counter/model agreement", c4_counter_model, true),
        ("5 algorithm structure", c5_structure, true),
        ("6 accuracy bands", c6_accuracy_bands, true),
        ("7 blocked LU accuracy", c7_blocked_lu, true),
        ("8 Lotkin conditioning", c8_lotkin, true),
        ("9 performance ordering", c9_performance, false),
        ("10 table layout", c10_table_layout, true),
    ];
    let mut failed = 0;
    for (name, run, hard) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name} [{secs:.1}s]: {detail}"),
            Err(detail) if hard => {
                failed += 1;
                println!("FAIL  criterion {name} [{secs:.1}s]: {detail}");
            }
            Err(detail) => println!("INFO  criterion {name} [{secs:.1}s]: {detail}"),
        }
    }
    if failed == 0 {
        println!("acceptance: all hard criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
