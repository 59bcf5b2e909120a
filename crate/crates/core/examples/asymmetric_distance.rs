//! Distances, Z-balls and list radii on a small code.
//!
//! `cargo run --example asymmetric_distance`

use zchannel::oracle::list_radius_exhaustive;
use zchannel::zcore::{avg_radius, dh, dz, list_radius, zball_contains};
use zchannel::{BitWord, Code};

fn main() -> zchannel::Result<()> {
    let x: BitWord = "110100".parse()?;
    let y: BitWord = "101100".parse()?;
    println!("x={x} y={y}: d_Z={} d_H={}", dz(&x, &y)?, dh(&x, &y)?);

    // the receiver sees 100100: both words lie one erasure away
    let received: BitWord = "100100".parse()?;
    println!("ball of radius 1 around {received} holds x: {}, y: {}", zball_contains(&received, 1, &x)?, zball_contains(&received, 1, &y)?);

    let code = Code::from_text("n=6 w=3\n111000\n100110\n010101\n001011\n")?;
    for l in 1..=3 {
        println!("L={l}: list radius {} (balls: {})", list_radius(&code, l)?, list_radius_exhaustive(&code, l)?);
    }
    println!("average radius of the whole code: {}", avg_radius(code.words())?);
    Ok(())
}
