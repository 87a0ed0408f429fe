mod common;

use common::*;
use hypercoarse::generate::{random_graph, random_sparse};
use hypercoarse::mmio::{load_matrix_market, read_edge_list, read_matrix_market, save_matrix_market, write_edge_list};
use hypercoarse::sparse::Side;
use hypercoarse::{incidence_matrix, laplacian};

#[test]
fn double_transpose_round_trip() {
    let a = random_sparse(50, 30, 0.05, 1).unwrap();
    assert_eq!(a.transpose().transpose(), a);
    assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
}

#[test]
fn norms_match_dense() {
    let a = random_sparse(70, 45, 0.08, 2).unwrap();
    let d = a.to_dense();
    for (j, v) in a.column_norms().iter().enumerate() {
        let want = d.column(j).norm();
        assert!((v - want).abs() <= 1e-12 * want.max(1.0));
    }
    let sum: f64 = a.column_norms().iter().map(|x| x * x).sum();
    assert!((a.frobenius_norm() - sum.sqrt()).abs() <= 1e-12 * a.frobenius_norm());
    assert!((a.frobenius_norm() - d.norm()).abs() <= 1e-12 * d.norm());
}

#[test]
fn products_match_dense() {
    let a = random_sparse(40, 25, 0.1, 3).unwrap();
    let d = a.to_dense();
    let mut r = rng(4);
    let x = gaussian(25, 3, &mut r);
    let y = gaussian(40, 3, &mut r);
    let tol = |m: &Dense| 1e-12 * m.norm().max(1.0);
    let ax = &d * &x;
    assert!((a.mul_dense(&x).unwrap() - &ax).norm() <= tol(&ax));
    let aty = d.transpose() * &y;
    assert!((a.tr_mul_dense(&y).unwrap() - &aty).norm() <= tol(&aty));
    let xt = x.transpose();
    let xa = &y.transpose() * &d;
    assert!((a.multiply_dense(&y.transpose(), Side::Right, false).unwrap() - &xa).norm() <= tol(&xa));
    let xat = &xt * d.transpose();
    assert!((a.multiply_dense(&xt, Side::Right, true).unwrap() - &xat).norm() <= tol(&xat));
    let g = a.gram().to_dense();
    let gd = d.transpose() * &d;
    assert!((g - &gd).norm() <= tol(&gd));
}

#[test]
fn laplacian_null_vector_and_psd() {
    for seed in 0..10 {
        let g = random_graph(25, 60, seed).unwrap();
        let b = incidence_matrix(&g).unwrap();
        let k = laplacian(&b).to_dense();
        for i in 0..25 {
            assert!(k.row(i).sum().abs() < 1e-12);
        }
        let eig = k.clone().symmetric_eigen();
        let scale = k.norm();
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-12 * scale));
        // the number of zero eigenvalues is the number of components
        let zeros = eig.eigenvalues.iter().filter(|&&l| l.abs() < 1e-9 * scale).count();
        assert_eq!(zeros, g.component_count());
    }
}

#[test]
fn matrix_market_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = random_sparse(33, 21, 0.1, 5).unwrap();
    let p = dir.path().join("a.mtx");
    save_matrix_market(&p, &a).unwrap();
    let b = load_matrix_market(&p).unwrap();
    assert_eq!(a.to_dense(), b.to_dense());

    let g = random_graph(12, 20, 6).unwrap();
    let mut buf = Vec::new();
    write_edge_list(&mut buf, &g).unwrap();
    let back = read_edge_list(buf.as_slice()).unwrap();
    assert_eq!(back.edges().len(), 20);
    for (x, y) in back.edges().iter().zip(g.edges()) {
        assert_eq!((x.0, x.1), (y.0, y.1));
        assert!((x.2 - y.2).abs() <= 1e-15 * y.2);
    }
}

#[test]
fn symmetric_file_is_expanded() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 2.0\n3 1 -1.0\n2 2 4.0\n";
    let a = read_matrix_market(text.as_bytes()).unwrap();
    let d = a.to_dense();
    assert_eq!(d, d.transpose());
    assert_eq!(a.nnz(), 4);
}

#[test]
#[ignore = "needs aft01.mtx under HYPERCOARSE_DATA_DIR"]
fn suitesparse_aft01_dimensions() {
    let a = load_matrix_market(require_dataset("aft01.mtx")).unwrap();
    assert_eq!((a.nrows(), a.ncols()), (8205, 8205));
}
