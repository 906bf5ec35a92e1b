fn main() {
    std::process::exit(pod_dg::cli::run(std::env::args_os()));
}
