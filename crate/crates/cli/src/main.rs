fn main() {
    std::process::exit(planner_routing_cli::run_cli(std::env::args_os()));
}
