#![allow(dead_code)]

use dirac_core::legendre::{ModelSpec, Stratum};

pub fn example_a() -> ModelSpec {
    let mut m = ModelSpec::new(&["x", "y", "z"]).unwrap();
    m.set_lagrangian("(z_dot - y*x_dot)^2/2").unwrap();
    let c = Stratum::new("C")
        .equal_zero(m.parse("p_y").unwrap())
        .equal_zero(m.parse("p_x + y*p_z").unwrap())
        .nonzero(m.parse("p_z").unwrap());
    let c0 = Stratum::new("C0")
        .equal_zero(m.parse("p_y").unwrap())
        .equal_zero(m.parse("p_x + y*p_z").unwrap())
        .equal_zero(m.parse("p_z").unwrap());
    m.constraint_strata = vec![c, c0];
    m
}

pub fn example_b() -> ModelSpec {
    let mut m = ModelSpec::new(&["x", "y"]).unwrap();
    m.set_lagrangian("(y^2*x_dot^2 + x^2*y_dot^2)/2").unwrap();
    let p = |s: &str| m.parse(s).unwrap();
    let strata = vec![
        Stratum::new("open").nonzero(p("x*y")),
        Stratum::new("x=0").equal_zero(p("x")).equal_zero(p("p_x")).equal_zero(p("p_y")).nonzero(p("y")),
        Stratum::new("y=0").equal_zero(p("y")).equal_zero(p("p_x")).equal_zero(p("p_y")).nonzero(p("x")),
        Stratum::new("origin").equal_zero(p("x")).equal_zero(p("y")).equal_zero(p("p_x")).equal_zero(p("p_y")),
    ];
    m.constraint_strata = strata;
    m
}

pub fn open_b(m: &ModelSpec) -> Stratum {
    Stratum::new("open").nonzero(m.parse("x*y").unwrap())
}
