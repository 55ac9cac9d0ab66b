//! Building a piecewise-constant function, probing it, and saving it as JSON.

use contensor::interval::Kind;
use contensor::{io, ContTensor, Interval, Value};

fn main() {
    let pieces = [
        (Interval::closed(1.0, 3.0), Value::Num(1.0)),
        (Interval::from_kind(3.0, 4.0, Kind::LeftOpen), Value::Num(0.5)),
        (Interval::point(6.0), Value::Num(9.0)),
    ];
    let f = ContTensor::from_pieces("f", &pieces, Value::Num(0.0)).unwrap();

    for x in [0.0, 1.0, 3.0, 3.5, 4.0, 6.0, 6.5] {
        println!("f({x}) = {}", f.eval(&[x]).unwrap());
    }
    for p in f.pieces(false) {
        println!("piece {} -> {}", p.path[0], p.value);
    }

    let json = io::save_string(&f);
    println!("{json}");
    assert_eq!(io::load_str(&json).unwrap(), f);
}
