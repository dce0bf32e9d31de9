fn main() {
    std::process::exit(voronoi_extremes::cli::run(
        std::env::args_os(),
        &mut std::io::stdout(),
    ));
}
