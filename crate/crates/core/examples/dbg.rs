use soq_core::qlimit::*;
fn main() {
    let q: f64 = 0.5;
    for l in [2usize, 3, 4, 5, 6] {
        let r = verify_identity("d4-x2q-series", q, 12, 4, l, 1e-30).unwrap();
        println!("L={l}: residual {r:.6e}  log-ratio vs q^2L: {:.3}", r.ln() / (2.0 * l as f64 * q.ln()));
    }
}
