fn main() {
    std::process::exit(erdos_szekeres::cli::run(std::env::args_os()));
}
