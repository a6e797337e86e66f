fn main() {
    std::process::exit(osc_master::cli::run());
}
