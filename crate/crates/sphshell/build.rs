fn main() {
    // Dense complex LU/solve/gemm go through the system BLAS/LAPACK.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
