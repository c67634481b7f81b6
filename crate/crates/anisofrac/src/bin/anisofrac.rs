fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ANISOFRAC_LOG")).init();
    std::process::exit(anisofrac::cli::run());
}
