fn main() { let a: Vec<String> = std::env::args().collect(); std::process::exit(vdc_lab::run(&a)); }
