//! Order-3 jets carry every partial derivative up to third order through
//! ordinary arithmetic. Here `f(x, y) = eˣ sin y / (1 + x²)` is evaluated on
//! jets seeded at a point and compared with central finite differences.

use kkflat::jet::Jet3;

fn f_jet(x: &[Jet3]) -> Jet3 {
    let num = x[0].exp() * x[1].sin();
    let den = 1.0 + &x[0] * &x[0];
    &num * &den.recip()
}

fn f(x: f64, y: f64) -> f64 {
    x.exp() * y.sin() / (1.0 + x * x)
}

fn main() {
    let p = [0.3, -0.7];
    let jets = Jet3::seed_point(&p).expect("two variables");
    let v = f_jet(&jets);

    let h = 1e-3;
    let fd_x = (f(p[0] + h, p[1]) - f(p[0] - h, p[1])) / (2.0 * h);
    let fd_xy = (f(p[0] + h, p[1] + h) - f(p[0] + h, p[1] - h) - f(p[0] - h, p[1] + h) + f(p[0] - h, p[1] - h))
        / (4.0 * h * h);
    let fd_yyy = (f(p[0], p[1] + 2.0 * h) - 2.0 * f(p[0], p[1] + h) + 2.0 * f(p[0], p[1] - h) - f(p[0], p[1] - 2.0 * h))
        / (2.0 * h * h * h);

    println!("f          = {:+.12}  (direct {:+.12})", v.value(), f(p[0], p[1]));
    println!("∂x f       = {:+.12}  (fd {:+.12})", v.derivative(&[0]), fd_x);
    println!("∂x∂y f     = {:+.12}  (fd {:+.12})", v.derivative(&[0, 1]), fd_xy);
    println!("∂y∂y∂y f   = {:+.12}  (fd {:+.12})", v.derivative(&[1, 1, 1]), fd_yyy);
    // sin''' = −cos, so ∂y³ f = −eˣ cos y / (1 + x²) exactly.
    let exact = -p[0].exp() * p[1].cos() / (1.0 + p[0] * p[0]);
    println!("closed-form ∂y³ f = {exact:+.12}, jet error {:.1e}", (v.derivative(&[1, 1, 1]) - exact).abs());
}
