//! SoftPool on hand-picked windows, next to max and average pooling.
//!
//! ```text
//! cargo run --release --example softpool_demo
//! ```

use cgdetect::ops::{maxpool_forward, PoolWindow};
use cgdetect::softpool::{softpool_backward, softpool_forward, SoftPoolConfig};
use cgdetect::Tensor4;

fn main() -> cgdetect::Result<()> {
    let windows: [[f64; 4]; 5] = [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, 2.0, 3.0, 4.0],
        [0.0, 0.0, 0.0, 10.0],
        [-3.0, 5.0, 5.0, -3.0],
        [1000.0, 999.0, -1000.0, 0.0],
    ];
    println!("{:<28} {:>10} {:>10} {:>10}", "window", "mean", "softpool", "max");
    for w in windows {
        let x = Tensor4::from_vec([1, 1, 2, 2], w.to_vec())?;
        let soft = softpool_forward(&x, SoftPoolConfig::default())?.data()[0];
        let max = maxpool_forward(&x, PoolWindow::default())?.0.data()[0];
        let mean = w.iter().sum::<f64>() / 4.0;
        println!("{:<28} {mean:>10.5} {soft:>10.5} {max:>10.5}", format!("{w:?}"));
    }

    // The gradient w_i(1 + a_i - out) goes negative for small inputs.
    let x = Tensor4::from_vec([1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0])?;
    let g = softpool_backward(&Tensor4::full([1, 1, 1, 1], 1.0), &x, SoftPoolConfig::default())?;
    println!("d out / d a for [1,2,3,4]: {:?}", g.data());
    println!("sum of gradients (1 by shift equivariance): {:.6}", g.sum());
    Ok(())
}
