use airmatch::netcore::{
    abcd_to_s, cascade, cascade_all, gamma_from_z, series_element, shunt_element, Abcd, Complex, Z0,
};
use proptest::prelude::*;

#[derive(Debug, Clone, Copy)]
enum Element {
    Series(Complex),
    Shunt(Complex),
}

impl Element {
    fn abcd(self) -> Abcd {
        match self {
            Element::Series(z) => series_element(z).unwrap(),
            Element::Shunt(z) => shunt_element(1.0 / z).unwrap(),
        }
    }
}

fn element(lossless: bool) -> impl Strategy<Value = Element> {
    let r = if lossless { Just(0.0).boxed() } else { (0.0..300.0f64).boxed() };
    // reactances kept away from zero so shunt admittances stay bounded
    let x = prop_oneof![-800.0..-1.0f64, 1.0..800.0f64];
    (r, x, any::<bool>()).prop_map(|(r, x, series)| {
        let z = Complex::new(r, x);
        if series {
            Element::Series(z)
        } else {
            Element::Shunt(z)
        }
    })
}

fn chain(lossless: bool) -> impl Strategy<Value = Vec<Element>> {
    prop::collection::vec(element(lossless), 1..7)
}

fn build(elems: &[Element]) -> Abcd {
    let m: Vec<Abcd> = elems.iter().map(|e| e.abcd()).collect();
    cascade_all(m.iter()).unwrap()
}

fn close(a: Complex, b: Complex, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn reciprocity(elems in chain(false)) {
        let m = build(&elems);
        prop_assert!((m.determinant() - 1.0).norm() < 1e-9, "det {}", m.determinant());
    }

    #[test]
    fn passivity(elems in chain(false)) {
        let s = abcd_to_s(&build(&elems), Z0).unwrap();
        prop_assert!(s.s11.norm_sqr() + s.s21.norm_sqr() <= 1.0 + 1e-9);
        prop_assert!(s.s22.norm_sqr() + s.s12.norm_sqr() <= 1.0 + 1e-9);
        prop_assert!((s.s21 - s.s12).norm() < 1e-9);
    }

    #[test]
    fn lossless_equality(elems in chain(true)) {
        let s = abcd_to_s(&build(&elems), Z0).unwrap();
        prop_assert!((s.s11.norm_sqr() + s.s21.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn loaded_consistency(elems in chain(false), rl in 1.0..200.0f64, xl in -300.0..300.0f64) {
        let load = Complex::new(rl, xl);
        let m = build(&elems);
        let direct = gamma_from_z(m.input_impedance(load).unwrap(), Z0).unwrap();
        // reflection seen through the two-port's S-parameters
        let s = abcd_to_s(&m, Z0).unwrap();
        let gl = gamma_from_z(load, Z0).unwrap();
        let via_s = s.s11 + s.s12 * s.s21 * gl / (1.0 - s.s22 * gl);
        prop_assert!(close(via_s, direct, 1e-9), "{via_s} vs {direct}");
    }

    #[test]
    fn associativity(a in element(false), b in element(false), c in element(false)) {
        let (a, b, c) = (a.abcd(), b.abcd(), c.abcd());
        let left = cascade(&cascade(&a, &b).unwrap(), &c).unwrap();
        let right = cascade(&a, &cascade(&b, &c).unwrap()).unwrap();
        for (x, y) in [(left.a, right.a), (left.b, right.b), (left.c, right.c), (left.d, right.d)] {
            prop_assert!(close(x, y, 1e-9), "{x} vs {y}");
        }
    }
}
