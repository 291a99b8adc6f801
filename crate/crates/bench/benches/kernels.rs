use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num::complex::Complex64;

use trinomial::amoeba::{amoeba_membership, AmoebaOptions};
use trinomial::mellinbarnes::{residues, DivisorPairing, MBIntegralData, ResidueCone};
use trinomial::oracle::principal_solution;
use trinomial::rational::{int, integers};
use trinomial::systems::fixtures::{eq1, quadratic};
use trinomial::taylor::taylor_coefficient;
use trinomial::{build_reduction, smith_normal_form, IntegerMatrix, MultiIndex, PairSelection, PairTag, TaylorSeries};

fn snf(c: &mut Criterion) {
    let m = IntegerMatrix::from_rows(&[
        vec![4, 2, 0, 1, 3],
        vec![1, 4, 2, 0, 2],
        vec![0, 1, 4, 2, 1],
        vec![3, 0, 1, 4, 2],
        vec![2, 3, 0, 1, 4],
    ]);
    c.bench_function("smith_normal_form_5x5", |b| b.iter(|| smith_normal_form(black_box(&m)).unwrap()));
}

fn coefficients(c: &mut Criterion) {
    let red = build_reduction(&eq1(), &PairSelection::uniform(2, PairTag::W0)).unwrap();
    let d = integers(&[1, 1]);
    let k = MultiIndex(vec![12, 9]);
    c.bench_function("taylor_coefficient_k_12_9", |b| {
        b.iter(|| taylor_coefficient(black_box(&red), black_box(&d), black_box(&k)).unwrap())
    });
    let mut group = c.benchmark_group("taylor_coefficients_up_to");
    for degree in [10u64, 20] {
        group.bench_with_input(BenchmarkId::from_parameter(degree), &degree, |b, &degree| {
            // fresh series each time so the cache does not hide the work
            b.iter(|| TaylorSeries::new(red.clone(), d.clone()).unwrap().coefficients(degree).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let sys = eq1();
    let x = [Complex64::new(0.1, 0.05), Complex64::new(-0.08, 0.02)];
    c.bench_function("principal_solution_eq1", |b| {
        b.iter(|| principal_solution(&sys, black_box(&x), 10, 1e-12).unwrap())
    });
}

fn mellin_barnes(c: &mut Criterion) {
    let data = MBIntegralData::new(&eq1(), vec![int(1), int(1)]).unwrap();
    let pairing = DivisorPairing::parse("2,3|1,4", 2).unwrap();
    let cone = ResidueCone::parse(data.gamma().to_vec(), "2,-1;-1,2").unwrap();
    c.bench_function("mb_residues_bound_8", |b| b.iter(|| residues(&data, &pairing, &cone, 8).unwrap()));
}

fn amoeba(c: &mut Criterion) {
    let sys = quadratic();
    let options = AmoebaOptions { attempts: 50, ..Default::default() };
    c.bench_function("amoeba_membership_univariate", |b| {
        b.iter(|| amoeba_membership(&sys, black_box(&[2f64.ln()]), &options).unwrap())
    });
}

criterion_group!(kernels, snf, coefficients, oracle, mellin_barnes, amoeba);
criterion_main!(kernels);
