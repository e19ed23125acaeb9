use drkit_core::symbols::fourier_bump_coeffs;

fn main() {
    let c = fourier_bump_coeffs(256, 40);
    println!("c00={:.4e}", c[0][0]);
    for &kk_lo in &[0.0f64, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0] {
        let mut mx = 0.0f64;
        let mut mxw = 0.0f64;
        for (k1, row) in c.iter().enumerate() {
            for (k2, &v) in row.iter().enumerate() {
                let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
                if kk >= kk_lo && kk < kk_lo + 5.0 {
                    mx = mx.max(v);
                    mxw = mxw.max(v * (1.0 + kk).powi(6));
                }
            }
        }
        println!("|k| in [{kk_lo},{}) : max|c|={mx:.3e}  max weighted={mxw:.3e}", kk_lo + 5.0);
    }
}
