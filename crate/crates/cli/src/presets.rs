//! Named configurations for the `hyperbolic` and `simulate` subcommands.

use std::f64::consts::PI;

use weakforce::space::Configuration;

pub const SHAPES: &[&str] = &["polygon", "collinear"];

/// Bodies at the vertices of a regular polygon in the first coordinate plane.
pub fn polygon(bodies: usize, dim: usize) -> Configuration {
    let mut c = Configuration::zeros(bodies, dim);
    for i in 0..bodies {
        let phase = 2.0 * PI * i as f64 / bodies as f64;
        let p = c.point_mut(i);
        p[0] = phase.cos();
        p[1] = phase.sin();
    }
    c
}

/// Equally spaced bodies on the first axis, centred at the origin.
pub fn collinear(bodies: usize, dim: usize) -> Configuration {
    let mut c = Configuration::zeros(bodies, dim);
    for i in 0..bodies {
        c.point_mut(i)[0] = i as f64 - 0.5 * (bodies - 1) as f64;
    }
    c
}

pub fn shape(name: &str, bodies: usize, dim: usize) -> Option<Configuration> {
    match name {
        "polygon" => Some(polygon(bodies, dim)),
        "collinear" => Some(collinear(bodies, dim)),
        _ => None,
    }
}

/// Quarter turn in the first coordinate plane.
pub fn quarter_turn(x: &Configuration) -> Configuration {
    let mut out = x.clone();
    for i in 0..x.bodies() {
        let (a, b) = (x.point(i)[0], x.point(i)[1]);
        let p = out.point_mut(i);
        p[0] = -b;
        p[1] = a;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use weakforce::space::min_separation;

    #[test]
    fn presets_are_collision_free() {
        for n in 2..7 {
            for name in SHAPES {
                let c = shape(name, n, 3).unwrap();
                assert!(min_separation(&c) > 0.1);
                assert!(min_separation(&quarter_turn(&c)) > 0.1);
            }
        }
        assert!(shape("nope", 3, 2).is_none());
    }
}
