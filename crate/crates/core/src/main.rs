fn main() -> std::process::ExitCode {
    lie_maxwell::cli::main_with_args(std::env::args_os())
}
