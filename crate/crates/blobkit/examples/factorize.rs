//! Pre-Iwasawa factorization S = V_P M_L R of random symplectic matrices, and the
//! normal form of the quantum blob S(B(0, √ħ)).

use blobkit::blobs::QuantumBlob;
use blobkit::linalg::max_abs;
use blobkit::symplectic::{pre_iwasawa, random_symplectic, symplectic_residual, SymplecticMatrix};

fn main() -> blobkit::Result<()> {
    for n in 1..=3 {
        let s = random_symplectic(n, 42 + n as u64, 8)?;
        let f = pre_iwasawa(&s)?;
        println!("n = {n}");
        println!("  |S^T J S - J|       = {:.2e}", symplectic_residual(s.matrix())?);
        println!("  |V_P M_L R - S|     = {:.2e}", max_abs(&(f.reconstruct() - s.matrix())));
        println!("  rotation residual   = {:.2e}", f.rotation_residual());
        println!("  eig(L)              = {:?}", f.l.symmetric_eigenvalues().as_slice());
    }

    // Right-multiplying by a rotation leaves the blob unchanged.
    let s = random_symplectic(2, 7, 8)?;
    let r = pre_iwasawa(&random_symplectic(2, 8, 8)?)?.r;
    let q1 = QuantumBlob::centered(s.clone(), 1.0)?;
    let q2 = QuantumBlob::centered(s.compose(&SymplecticMatrix::new(r)?), 1.0)?;
    println!("S and S·R give the same blob: {}", q1.same_as(&q2, 1e-9)?);
    let nf = q1.normal_form()?;
    println!("normal form P = {:.4}", nf.p);
    println!("normal form L = {:.4}", nf.l);
    Ok(())
}
