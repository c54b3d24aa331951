// Command-line driver: phantom synthesis, mask generation, prior training,
// MRI/CT reconstruction and image-quality metrics, with deterministic seeded
// runs and a manifest per run.

#include "CLI11.hpp"

#include "hfdaep/ct.hpp"
#include "hfdaep/dae.hpp"
#include "hfdaep/io.hpp"
#include "hfdaep/metrics.hpp"
#include "hfdaep/mri.hpp"
#include "hfdaep/phantom.hpp"
#include "hfdaep/prior.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace hfdaep;

namespace {

struct SharedOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool deterministic = false;
};

void add_shared(CLI::App* cmd, SharedOptions& shared) {
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    cmd->add_option("--config", shared.config_path,
                    "flat key = value configuration file (flags win on conflict)");
    cmd->add_option("--out", shared.out_dir, "output directory");
    cmd->add_option("--seed", shared.seed, "RNG seed");
    cmd->add_flag("--deterministic", shared.deterministic,
                  "single-threaded reference mode (bitwise reproducible)");
}

// Expands "--config <file>" into "--key=value" arguments inserted right after
// the subcommand name, so explicit command-line flags (parsed last) win.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            break;
        }
    }
    if (path.empty()) return args;

    std::size_t subcmd = 0;
    while (subcmd < args.size() && !args[subcmd].empty() && args[subcmd][0] == '-') ++subcmd;
    if (subcmd == args.size()) return args;

    std::vector<std::string> injected;
    for (const auto& [key, value] : read_key_values(path))
        injected.push_back("--" + key + "=" + value);
    args.insert(args.begin() + subcmd + 1, injected.begin(), injected.end());
    return args;
}

void begin_run(const SharedOptions& shared) {
    fs::create_directories(shared.out_dir);
    if (shared.deterministic) {
#ifdef _OPENMP
        omp_set_num_threads(1);
#endif
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void write_manifest(const SharedOptions& shared, KeyValues kv) {
    kv.emplace_back("seed", std::to_string(shared.seed));
    kv.emplace_back("deterministic", shared.deterministic ? "1" : "0");
    kv.emplace_back("out", shared.out_dir);
    write_key_values(kv, (fs::path(shared.out_dir) / "manifest.txt").string());
}

std::string alphas_to_string(const std::vector<double>& a) {
    std::ostringstream os;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) os << ",";
        os << a[i];
    }
    return os.str();
}

MaskKind parse_mask_kind(const std::string& s) {
    if (s == "random2d") return MaskKind::random2d;
    if (s == "radial") return MaskKind::radial;
    if (s == "cartesian1d") return MaskKind::cartesian1d;
    throw CLI::ValidationError("--mask-kind", "unknown mask kind: " + s);
}

std::vector<std::string> list_hfdp_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".hfdp")
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .hfdp files found in " + dir);
    return files;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << header << "\n";
    for (const auto& r : rows) f << r << "\n";
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataOptions {
    SharedOptions shared;
    std::string kind = "random_ellipses";
    int size = 128;
    int count = 1;
    double intensity_min = 0.0;
    double intensity_max = 1.0;
};

int run_gen_data(const GenDataOptions& o) {
    begin_run(o.shared);
    PhantomSpec spec;
    spec.kind = o.kind == "shepp_logan" ? PhantomKind::shepp_logan : PhantomKind::random_ellipses;
    if (o.kind != "shepp_logan" && o.kind != "random_ellipses")
        throw std::runtime_error("unknown phantom kind: " + o.kind);
    spec.size = o.size;
    spec.count = o.count;
    spec.seed = o.shared.seed;
    spec.intensity_min = o.intensity_min;
    spec.intensity_max = o.intensity_max;

    const auto phantoms = generate_phantoms(spec);
    for (std::size_t k = 0; k < phantoms.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "phantom_%03zu.hfdp", k);
        save_grid(phantoms[k], (fs::path(o.shared.out_dir) / name).string());
    }

    write_manifest(o.shared, {{"task", "gen-data"},
                              {"kind", o.kind},
                              {"size", std::to_string(o.size)},
                              {"count", std::to_string(o.count)},
                              {"intensity_min", fmt(o.intensity_min)},
                              {"intensity_max", fmt(o.intensity_max)}});
    std::cout << "wrote " << phantoms.size() << " phantom(s) to " << o.shared.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// make-mask

struct MakeMaskOptions {
    SharedOptions shared;
    std::string kind = "random2d";
    double R = 5.0;
    int height = 256;
    int width = 256;
};

int run_make_mask(const MakeMaskOptions& o) {
    begin_run(o.shared);
    const SamplingMask mask = make_mask(parse_mask_kind(o.kind), o.R, o.height, o.width,
                                        o.shared.seed);
    const std::string path = (fs::path(o.shared.out_dir) / "mask.hfdp").string();
    save_mask(mask, path, o.shared.seed);

    write_manifest(o.shared, {{"task", "make-mask"},
                              {"mask_kind", o.kind},
                              {"R", fmt(o.R)},
                              {"height", std::to_string(o.height)},
                              {"width", std::to_string(o.width)},
                              {"kept_fraction", fmt(mask.kept_fraction())}});
    std::cout << "mask kept fraction " << mask.kept_fraction() << " -> " << path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    SharedOptions shared;
    std::string data_dir;
    std::string task = "mri";
    std::vector<double> alphas = {1000.0, 800.0, 400.0, 50.0};
    double sigma_eta_255 = 25.0;
    bool include_gradients = false;
    int patch = 40;
    int batch = 64;
    int epochs = 20;
    int steps = 0;
    double lr = 1e-3;
    int features = 32;
    int depth = 5;
};

int run_train(const TrainOptions& o) {
    begin_run(o.shared);
    const AlphaProfile profile{o.alphas};
    const bool complex_input = o.task == "mri";
    if (o.task != "mri" && o.task != "ct") throw std::runtime_error("unknown task: " + o.task);

    std::vector<ProfileStack> dataset;
    for (const auto& path : list_hfdp_files(o.data_dir)) {
        const RealGrid img = load_grid(path);
        if (complex_input) {
            dataset.push_back(
                forward_transform(ComplexGrid::from_real(img), profile, o.include_gradients)
                    .stack);
        } else {
            dataset.push_back(forward_transform(img, profile, o.include_gradients).stack);
        }
    }

    const int channels = dataset.front().channel_count();
    const double sigma = o.sigma_eta_255 / 255.0;
    TrainConfig cfg;
    cfg.patch_size = o.patch;
    cfg.batch_size = o.batch;
    cfg.epochs = o.epochs;
    cfg.steps_per_epoch = o.steps;
    cfg.learning_rate = o.lr;
    cfg.seed = o.shared.seed;

    const TrainResult result =
        dae_train(dataset, cfg, sigma, make_default_model(channels, o.features, o.shared.seed, o.depth));

    const std::string model_path = (fs::path(o.shared.out_dir) / "model.hfdm").string();
    save_model(result.model, model_path);

    std::vector<std::string> rows;
    for (std::size_t e = 0; e < result.loss_trace.size(); ++e)
        rows.push_back(std::to_string(e + 1) + "," + fmt(result.loss_trace[e]));
    write_csv((fs::path(o.shared.out_dir) / "loss_trace.csv").string(), "epoch,loss", rows);

    write_manifest(o.shared, {{"task", "train"},
                              {"data", o.data_dir},
                              {"train_task", o.task},
                              {"alphas", alphas_to_string(o.alphas)},
                              {"sigma_eta", fmt(o.sigma_eta_255)},
                              {"sigma_eta_normalized", fmt(sigma)},
                              {"include_gradients", o.include_gradients ? "1" : "0"},
                              {"channels", std::to_string(channels)},
                              {"patch", std::to_string(o.patch)},
                              {"batch", std::to_string(o.batch)},
                              {"epochs", std::to_string(o.epochs)},
                              {"steps_per_epoch", std::to_string(o.steps)},
                              {"learning_rate", fmt(o.lr)},
                              {"features", std::to_string(o.features)},
                              {"depth", std::to_string(o.depth)},
                              {"dataset_size", std::to_string(dataset.size())}});
    std::cout << "trained model (" << channels << " channels) -> " << model_path
              << ", final loss " << result.loss_trace.back() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// recon-mri

struct ReconMriOptions {
    SharedOptions shared;
    std::string image_path;
    std::string model_path;
    std::string mask_path;
    std::string mask_kind = "random2d";
    double R = 5.0;
    std::uint64_t mask_seed = 0;
    std::vector<double> alphas = {1000.0, 800.0, 400.0, 50.0};
    bool include_gradients = false;
    bool identity_model = false;
    bool literal_lows = false;
    double lambda = 0.1;
    int iterations = 100;
    double noise_snr_db = 0.0;  // 0 = noiseless
};

int run_recon_mri(const ReconMriOptions& o) {
    begin_run(o.shared);
    const ComplexGrid truth = load_complex_grid(o.image_path);
    const AlphaProfile profile{o.alphas};

    SamplingMask mask;
    if (!o.mask_path.empty()) {
        mask = load_mask(o.mask_path);
        if (mask.height != truth.height || mask.width != truth.width)
            throw std::runtime_error("mask dimensions do not match the image");
    } else {
        mask = make_mask(parse_mask_kind(o.mask_kind), o.R, truth.height, truth.width,
                         o.mask_seed);
    }

    KSpaceData y = encode(truth, mask);
    if (o.noise_snr_db > 0.0) y = add_kspace_noise(y, o.noise_snr_db, o.shared.seed + 1);

    DaeModel model;
    const int channels = (static_cast<int>(o.alphas.size()) + (o.include_gradients ? 2 : 0)) * 2;
    if (o.identity_model) {
        model = make_identity_model(channels);
    } else {
        if (o.model_path.empty())
            throw std::runtime_error("recon-mri needs --model (or --identity-model)");
        model = load_model(o.model_path);
    }

    MriReconConfig cfg;
    cfg.lambda = o.lambda;
    cfg.iterations = o.iterations;
    cfg.prior.model = &model;
    cfg.prior.profile = profile;
    cfg.prior.include_gradients = o.include_gradients;
    cfg.prior.reentry = o.literal_lows ? LowsReentry::literal : LowsReentry::descend;

    const MriReconResult result = reconstruct_mri(y, cfg, &truth);

    const fs::path out(o.shared.out_dir);
    save_complex_grid(result.image, (out / "recon.hfdp").string());
    const auto window =
        write_pgm_preview(result.image.magnitude(), (out / "recon_preview.pgm").string());

    std::vector<std::string> rows;
    for (const auto& st : result.trace)
        rows.push_back(std::to_string(st.iteration) + "," + fmt(st.change) + "," + fmt(st.psnr));
    write_csv((out / "trace.csv").string(), "iteration,change,psnr", rows);

    const RealGrid zero_filled = adjoint(y).magnitude();
    const MetricReport base = compute_metrics(zero_filled, truth.magnitude());
    const MetricReport rec = compute_metrics(result.image.magnitude(), truth.magnitude());
    write_csv((out / "metrics.csv").string(), "method," + MetricReport::csv_header(),
              {"zero_filled," + base.csv_row(), "hfdaep," + rec.csv_row()});

    write_manifest(o.shared,
                   {{"task", "recon-mri"},
                    {"image", o.image_path},
                    {"model", o.identity_model ? "identity" : o.model_path},
                    {"mask", o.mask_path.empty() ? "generated" : o.mask_path},
                    {"mask_kind", o.mask_kind},
                    {"R", fmt(o.R)},
                    {"mask_seed", std::to_string(o.mask_seed)},
                    {"alphas", alphas_to_string(o.alphas)},
                    {"include_gradients", o.include_gradients ? "1" : "0"},
                    {"literal_lows", o.literal_lows ? "1" : "0"},
                    {"lambda", fmt(o.lambda)},
                    {"iterations", std::to_string(o.iterations)},
                    {"noise_snr_db", fmt(o.noise_snr_db)},
                    {"preview_window_min", fmt(window.first)},
                    {"preview_window_max", fmt(window.second)}});
    std::cout << "recon-mri: " << rec.line() << " (zero-filled " << base.line() << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// recon-ct

struct ReconCtOptions {
    SharedOptions shared;
    std::string image_path;
    std::string model_path;
    int views = 64;
    std::vector<double> alphas = {1000.0, 800.0, 400.0, 50.0};
    bool include_gradients = false;
    bool identity_model = false;
    bool literal_lows = false;
    double lambda = 50.0;
    int iterations = 100;
    bool noisy = false;
    double noise_f = 1e-5;
    double noise_T = 2.0;
    std::string weighting = "unweighted";
    double source_to_center = 40.0;
    double detector_to_center = 40.0;
    double image_extent = 20.0;
    double detector_width = 41.3;
    int detector_bins = 512;
    int full_views = 360;
};

int run_recon_ct(const ReconCtOptions& o) {
    begin_run(o.shared);
    const RealGrid truth = load_grid(o.image_path);
    const AlphaProfile profile{o.alphas};

    FanGeometry full;
    full.source_to_center = o.source_to_center;
    full.detector_to_center = o.detector_to_center;
    full.image_extent = o.image_extent;
    full.image_pixels = truth.height;
    full.detector_width = o.detector_width;
    full.detector_bins = o.detector_bins;
    full.view_angles = FanGeometry::uniform_angles(o.full_views);
    const FanGeometry geom = sparse_view_geometry(full, o.views);

    const Sinogram clean = siddon_project(truth, geom);
    NoiseModel nm;
    nm.f = {o.noise_f};
    nm.T = o.noise_T;
    nm.mu = clean.values;
    const Sinogram y = o.noisy ? add_ct_noise(clean, nm, o.shared.seed + 1) : clean;

    DaeModel model;
    const int channels = static_cast<int>(o.alphas.size()) + (o.include_gradients ? 2 : 0);
    if (o.identity_model) {
        model = make_identity_model(channels);
    } else {
        if (o.model_path.empty())
            throw std::runtime_error("recon-ct needs --model (or --identity-model)");
        model = load_model(o.model_path);
    }

    CtReconConfig cfg;
    cfg.lambda = o.lambda;
    cfg.iterations = o.iterations;
    cfg.prior.model = &model;
    cfg.prior.profile = profile;
    cfg.prior.include_gradients = o.include_gradients;
    cfg.prior.reentry = o.literal_lows ? LowsReentry::literal : LowsReentry::descend;
    if (o.weighting == "pwls")
        cfg.weighting = CtWeighting::pwls;
    else if (o.weighting == "pwls-inv-delta")
        cfg.weighting = CtWeighting::pwls_inv_delta;
    else if (o.weighting == "unweighted")
        cfg.weighting = CtWeighting::unweighted;
    else
        throw std::runtime_error("unknown weighting: " + o.weighting);

    const CtReconResult result = reconstruct_ct(y, nm, geom, cfg, &truth);
    const RealGrid baseline = fbp(y, geom);

    const fs::path out(o.shared.out_dir);
    save_grid(result.image, (out / "recon.hfdp").string());
    save_grid(baseline, (out / "fbp.hfdp").string());
    save_sinogram(y, (out / "sinogram.hfdp").string());
    save_geometry(geom, (out / "sinogram.hfdp.geometry").string());
    const auto window = write_pgm_preview(result.image, (out / "recon_preview.pgm").string());
    write_pgm_preview(baseline, (out / "fbp_preview.pgm").string());

    std::vector<std::string> rows;
    for (const auto& st : result.trace)
        rows.push_back(std::to_string(st.iteration) + "," + fmt(st.change) + "," + fmt(st.psnr));
    write_csv((out / "trace.csv").string(), "iteration,change,psnr", rows);

    const MetricReport base = compute_metrics(baseline, truth);
    const MetricReport rec = compute_metrics(result.image, truth);
    write_csv((out / "metrics.csv").string(), "method," + MetricReport::csv_header(),
              {"fbp," + base.csv_row(), "hfdaep," + rec.csv_row()});

    write_manifest(o.shared,
                   {{"task", "recon-ct"},
                    {"image", o.image_path},
                    {"model", o.identity_model ? "identity" : o.model_path},
                    {"views", std::to_string(o.views)},
                    {"full_views", std::to_string(o.full_views)},
                    {"alphas", alphas_to_string(o.alphas)},
                    {"include_gradients", o.include_gradients ? "1" : "0"},
                    {"literal_lows", o.literal_lows ? "1" : "0"},
                    {"lambda", fmt(o.lambda)},
                    {"iterations", std::to_string(o.iterations)},
                    {"noisy", o.noisy ? "1" : "0"},
                    {"noise_f", fmt(o.noise_f)},
                    {"noise_T", fmt(o.noise_T)},
                    {"weighting", o.weighting},
                    {"source_to_center", fmt(o.source_to_center)},
                    {"detector_to_center", fmt(o.detector_to_center)},
                    {"image_extent", fmt(o.image_extent)},
                    {"detector_width", fmt(o.detector_width)},
                    {"detector_bins", std::to_string(o.detector_bins)},
                    {"preview_window_min", fmt(window.first)},
                    {"preview_window_max", fmt(window.second)}});
    std::cout << "recon-ct: " << rec.line() << " (fbp " << base.line() << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsOptions {
    SharedOptions shared;
    std::string test_path;
    std::string ref_path;
    double dynamic_range = 1.0;
};

int run_metrics(const MetricsOptions& o) {
    begin_run(o.shared);
    auto load_real = [](const std::string& path) {
        const HfdpTensor t = read_hfdp(path);
        if (t.dims.size() != 2) throw std::runtime_error("metrics expects 2D tensors: " + path);
        if (t.dtype == 0x03) {
            ComplexGrid g(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
            g.values = t.complex_data;
            return g.magnitude();
        }
        RealGrid g(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
        g.values = t.real_data;
        return g;
    };
    const RealGrid test = load_real(o.test_path);
    const RealGrid ref = load_real(o.ref_path);
    const MetricReport r = compute_metrics(test, ref, o.dynamic_range);
    std::cout << r.line() << "\n";

    const std::string csv = (fs::path(o.shared.out_dir) / "metrics.csv").string();
    const bool fresh = !fs::exists(csv);
    std::ofstream f(csv, std::ios::app);
    if (fresh) f << "test,ref," << MetricReport::csv_header() << "\n";
    f << o.test_path << "," << o.ref_path << "," << r.csv_row() << "\n";

    write_manifest(o.shared, {{"task", "metrics"},
                              {"test", o.test_path},
                              {"ref", o.ref_path},
                              {"dynamic_range", fmt(o.dynamic_range)}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "multi-profile high-frequency DAE prior: training, MRI/CT reconstruction, metrics"};
    app.require_subcommand(1);

    GenDataOptions gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "synthesize a phantom corpus");
    add_shared(gen_cmd, gen.shared);
    gen_cmd->add_option("--kind", gen.kind, "shepp_logan | random_ellipses");
    gen_cmd->add_option("--size", gen.size, "phantom side length in pixels");
    gen_cmd->add_option("--count", gen.count, "number of phantoms");
    gen_cmd->add_option("--intensity-min", gen.intensity_min, "clip floor");
    gen_cmd->add_option("--intensity-max", gen.intensity_max, "clip ceiling");

    MakeMaskOptions mask;
    CLI::App* mask_cmd = app.add_subcommand("make-mask", "generate a k-space sampling mask");
    add_shared(mask_cmd, mask.shared);
    mask_cmd->add_option("--mask-kind", mask.kind, "random2d | radial | cartesian1d");
    mask_cmd->add_option("--R", mask.R, "acceleration factor");
    mask_cmd->add_option("--height", mask.height, "mask height");
    mask_cmd->add_option("--width", mask.width, "mask width");

    TrainOptions train;
    CLI::App* train_cmd = app.add_subcommand("train", "train the denoising prior");
    add_shared(train_cmd, train.shared);
    train_cmd->add_option("--data", train.data_dir, "directory of phantom .hfdp files")
        ->required();
    train_cmd->add_option("--task", train.task,
                          "mri (complex, 2N channels) | ct (real, N channels)");
    train_cmd->add_option("--alphas", train.alphas, "profile weights, strictly decreasing")
        ->delimiter(',');
    train_cmd->add_option("--sigma-eta", train.sigma_eta_255,
                          "training noise level on the 0-255 scale");
    train_cmd->add_flag("--include-gradients", train.include_gradients,
                        "append forward-difference channels");
    train_cmd->add_option("--patch", train.patch, "training patch size");
    train_cmd->add_option("--batch", train.batch, "batch size");
    train_cmd->add_option("--epochs", train.epochs, "epochs");
    train_cmd->add_option("--steps", train.steps, "steps per epoch (0 = derive)");
    train_cmd->add_option("--lr", train.lr, "learning rate");
    train_cmd->add_option("--features", train.features, "feature channels per layer");
    train_cmd->add_option("--depth", train.depth,
                          "encoder layers (same count of decoder layers)");

    ReconMriOptions rmri;
    CLI::App* rmri_cmd = app.add_subcommand("recon-mri", "undersampled MRI reconstruction");
    add_shared(rmri_cmd, rmri.shared);
    rmri_cmd->add_option("--image", rmri.image_path, "ground-truth image (.hfdp)")->required();
    rmri_cmd->add_option("--model", rmri.model_path, "trained model (.hfdm)");
    rmri_cmd->add_option("--mask", rmri.mask_path,
                         "sampling mask (.hfdp); generated when absent");
    rmri_cmd->add_option("--mask-kind", rmri.mask_kind, "random2d | radial | cartesian1d");
    rmri_cmd->add_option("--R", rmri.R, "acceleration factor");
    rmri_cmd->add_option("--mask-seed", rmri.mask_seed, "seed for the generated mask");
    rmri_cmd->add_option("--alphas", rmri.alphas, "profile weights")->delimiter(',');
    rmri_cmd->add_flag("--include-gradients", rmri.include_gradients,
                       "append forward-difference channels");
    rmri_cmd->add_flag("--identity-model", rmri.identity_model, "use the identity denoiser");
    rmri_cmd->add_flag("--literal-lows", rmri.literal_lows,
                       "re-add lowpass components inside the prior gradient");
    rmri_cmd->add_option("--lambda", rmri.lambda, "data-consistency weight");
    rmri_cmd->add_option("--iterations", rmri.iterations, "outer iterations");
    rmri_cmd->add_option("--noise-snr-db", rmri.noise_snr_db,
                         "k-space noise SNR (0 = noiseless)");

    ReconCtOptions rct;
    CLI::App* rct_cmd = app.add_subcommand("recon-ct", "sparse-view fan-beam CT reconstruction");
    add_shared(rct_cmd, rct.shared);
    rct_cmd->add_option("--image", rct.image_path, "ground-truth image (.hfdp)")->required();
    rct_cmd->add_option("--model", rct.model_path, "trained model (.hfdm)");
    rct_cmd->add_option("--views", rct.views, "number of acquired views");
    rct_cmd->add_option("--alphas", rct.alphas, "profile weights")->delimiter(',');
    rct_cmd->add_flag("--include-gradients", rct.include_gradients,
                      "append forward-difference channels");
    rct_cmd->add_flag("--identity-model", rct.identity_model, "use the identity denoiser");
    rct_cmd->add_flag("--literal-lows", rct.literal_lows,
                      "re-add lowpass components inside the prior gradient");
    rct_cmd->add_option("--lambda", rct.lambda, "prior weight in the surrogate update");
    rct_cmd->add_option("--iterations", rct.iterations, "outer iterations");
    rct_cmd->add_flag("--noisy", rct.noisy, "apply the exponential-variance noise model");
    rct_cmd->add_option("--noise-f", rct.noise_f, "per-bin noise scale f");
    rct_cmd->add_option("--noise-T", rct.noise_T, "noise scaling parameter T");
    rct_cmd->add_option("--weighting", rct.weighting, "unweighted | pwls | pwls-inv-delta");
    rct_cmd->add_option("--source-to-center", rct.source_to_center, "cm");
    rct_cmd->add_option("--detector-to-center", rct.detector_to_center, "cm");
    rct_cmd->add_option("--image-extent", rct.image_extent, "cm");
    rct_cmd->add_option("--detector-width", rct.detector_width, "cm");
    rct_cmd->add_option("--detector-bins", rct.detector_bins, "detector elements");
    rct_cmd->add_option("--full-views", rct.full_views, "full-scan view count");

    MetricsOptions met;
    CLI::App* met_cmd = app.add_subcommand("metrics", "PSNR/SSIM/HFEN between two images");
    add_shared(met_cmd, met.shared);
    met_cmd->add_option("--test", met.test_path, "image under test (.hfdp)")->required();
    met_cmd->add_option("--ref", met.ref_path, "reference image (.hfdp)")->required();
    met_cmd->add_option("--dynamic-range", met.dynamic_range, "SSIM dynamic range");

    std::vector<std::string> args;
    try {
        args = expand_config_args(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::reverse(args.begin(), args.end());  // App::parse consumes reversed argument lists
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen_cmd) return run_gen_data(gen);
        if (*mask_cmd) return run_make_mask(mask);
        if (*train_cmd) return run_train(train);
        if (*rmri_cmd) return run_recon_mri(rmri);
        if (*rct_cmd) return run_recon_ct(rct);
        if (*met_cmd) return run_metrics(met);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
