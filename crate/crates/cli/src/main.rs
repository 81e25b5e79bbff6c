fn main() {
    std::process::exit(coniso::run(std::env::args_os()));
}
