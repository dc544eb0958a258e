//! Fixtures shared by the criterion benches.

use wellcond_core::{
    generate, gram, sym_eig, Couplings, DenseMatrix, Family, GeneratorSpec, SymEig,
};

pub fn sphere(n: usize, p: usize, seed: u64) -> DenseMatrix {
    generate(&GeneratorSpec::new(Family::RandomSphere, n, p, seed)).expect("valid generator spec")
}

/// Spectrum of the first `r` columns of `x` and the couplings of column `r`
/// against it.
pub fn update_problem(x: &DenseMatrix, r: usize) -> (SymEig, Couplings) {
    let idx: Vec<usize> = (0..r).collect();
    let y = x.select_columns(&idx).expect("r < p");
    let eig = sym_eig(&gram(&y)).expect("small gram matrix");
    let c = Couplings::compute(&eig, &y, x.col(r));
    (eig, c)
}
