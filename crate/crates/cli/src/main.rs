fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = transitory_sim_cli::run::run_main(&args);
    std::process::exit(code as i32);
}
