fn main() {
    std::process::exit(semilin::run(std::env::args_os()));
}
