fn main() { println!("{}", heatpot::probe(1.0)); }
