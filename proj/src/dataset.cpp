#include "self/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "self/errors.hpp"
#include "self/rng.hpp"

namespace self {

std::size_t Dataset::active_count() const {
    std::size_t n = 0;
    for (const auto& rec : labels) {
        if (rec.status == LabelStatus::Active) ++n;
    }
    return n;
}

std::vector<std::size_t> Dataset::active_indices() const {
    std::vector<std::size_t> idx;
    idx.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].status == LabelStatus::Active) idx.push_back(i);
    }
    return idx;
}

std::vector<std::size_t> Dataset::all_indices() const {
    std::vector<std::size_t> idx(labels.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

std::vector<std::pair<int, int>> cifar10_pair_map() {
    return {{9, 1}, {2, 0}, {4, 7}, {3, 5}, {5, 3}};
}

namespace {

std::vector<LabelRecord> clean_records(const std::vector<int>& labels) {
    std::vector<LabelRecord> recs(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        recs[i] = {i, labels[i], labels[i], LabelStatus::Active};
    }
    return recs;
}

// Picks exactly round(p*n) indices via a seeded shuffle.
std::vector<std::size_t> pick_exact(const std::vector<std::size_t>& pool, double p, Rng& rng) {
    std::vector<std::size_t> order = pool;
    rng.shuffle(order);
    const auto want = static_cast<std::size_t>(
        std::llround(p * static_cast<double>(pool.size())));
    order.resize(std::min(want, order.size()));
    return order;
}

}  // namespace

std::vector<LabelRecord> inject_symmetric(const std::vector<int>& labels, double p, int class_count,
                                          std::uint64_t seed, bool exact_count) {
    if (class_count < 2) throw ConfigError("inject_symmetric: class_count must be >= 2");
    if (p < 0.0 || p > 1.0) throw ConfigError("inject_symmetric: ratio must be in [0,1]");
    auto recs = clean_records(labels);
    Rng rng(derive_seed(seed, 0x73796d));  // "sym"

    std::vector<std::size_t> to_flip;
    if (exact_count) {
        std::vector<std::size_t> all(labels.size());
        std::iota(all.begin(), all.end(), 0);
        to_flip = pick_exact(all, p, rng);
    } else {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (rng.uniform() < p) to_flip.push_back(i);
        }
    }
    for (std::size_t i : to_flip) {
        // Uniform over the K-1 classes other than the true one.
        const int offset = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(class_count - 1)));
        recs[i].original_label = (recs[i].true_label + offset) % class_count;
    }
    return recs;
}

std::vector<LabelRecord> inject_asymmetric(const std::vector<int>& labels, const NoiseSpec& spec,
                                           std::uint64_t seed) {
    if (spec.kind != NoiseKind::PairFlip && spec.kind != NoiseKind::NextClass)
        throw ConfigError("inject_asymmetric: spec kind must be pair_flip or next_class");
    if (spec.ratio < 0.0 || spec.ratio > 1.0)
        throw ConfigError("inject_asymmetric: ratio must be in [0,1]");

    int class_count = 0;
    for (int label : labels) class_count = std::max(class_count, label + 1);

    // source class -> target class; NextClass maps every class to (i+1)%K.
    std::vector<int> target(static_cast<std::size_t>(class_count), -1);
    if (spec.kind == NoiseKind::NextClass) {
        for (int c = 0; c < class_count; ++c) target[c] = (c + 1) % class_count;
    } else {
        for (const auto& [from, to] : spec.pair_map) {
            if (from < 0 || from >= class_count || to < 0 || to >= class_count)
                throw ConfigError("inject_asymmetric: pair map entry out of class range");
            target[from] = to;
        }
    }

    auto recs = clean_records(labels);
    Rng rng(derive_seed(seed, 0x6173796dULL));  // "asym"

    if (spec.exact_count) {
        for (int c = 0; c < class_count; ++c) {
            if (target[c] < 0) continue;
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] == c) members.push_back(i);
            }
            for (std::size_t i : pick_exact(members, spec.ratio, rng)) {
                recs[i].original_label = target[c];
            }
        }
    } else {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const int t = target[labels[i]];
            if (t >= 0 && rng.uniform() < spec.ratio) recs[i].original_label = t;
        }
    }
    return recs;
}

void apply_noise(Dataset& ds, const NoiseSpec& spec, std::uint64_t seed) {
    std::vector<int> truth(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) truth[i] = ds.labels[i].true_label;

    switch (spec.kind) {
        case NoiseKind::None:
            ds.labels = [&] {
                std::vector<LabelRecord> recs(truth.size());
                for (std::size_t i = 0; i < truth.size(); ++i)
                    recs[i] = {i, truth[i], truth[i], LabelStatus::Active};
                return recs;
            }();
            return;
        case NoiseKind::Symmetric:
            ds.labels = inject_symmetric(truth, spec.ratio, ds.class_count, seed, spec.exact_count);
            return;
        case NoiseKind::PairFlip:
        case NoiseKind::NextClass:
            ds.labels = inject_asymmetric(truth, spec, seed);
            return;
    }
}

Dataset make_blobs(int class_count, std::size_t per_class, std::size_t dim, double spread,
                   std::uint64_t seed) {
    if (class_count < 2) throw ConfigError("make_blobs: class_count must be >= 2");
    if (per_class < 1) throw ConfigError("make_blobs: per_class must be >= 1");
    if (dim < 1) throw ConfigError("make_blobs: dim must be >= 1");

    Rng rng(derive_seed(seed, 0x626c6f62));  // "blob"
    const std::size_t k = static_cast<std::size_t>(class_count);

    // Rejection-sample cluster means in a box, enforcing a separation margin
    // well above the 4*spread floor so the Bayes error stays negligible.
    const double min_dist = 6.0 * spread;
    std::vector<std::vector<double>> means;
    double box = min_dist * std::max(2.0, std::cbrt(static_cast<double>(k)) * 2.0);
    while (means.size() < k) {
        std::vector<double> cand(dim);
        for (double& v : cand) v = rng.uniform(-box, box);
        bool ok = true;
        for (const auto& m : means) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) d2 += (cand[j] - m[j]) * (cand[j] - m[j]);
            if (d2 < min_dist * min_dist) {
                ok = false;
                break;
            }
        }
        if (ok) {
            means.push_back(std::move(cand));
        } else {
            box *= 1.01;  // guarantees termination even in low dimensions
        }
    }

    Dataset ds;
    ds.class_count = class_count;
    const std::size_t n = k * per_class;
    ds.features = Tensor2(n, dim);
    ds.labels.resize(n);
    std::size_t row = 0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            for (std::size_t j = 0; j < dim; ++j) {
                ds.features.at(row, j) = means[c][j] + spread * rng.gauss();
            }
            ds.labels[row] = {row, static_cast<int>(c), static_cast<int>(c), LabelStatus::Active};
        }
    }

    // Standardize each dimension to zero mean / unit variance.
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += ds.features.at(r, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = ds.features.at(r, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        for (std::size_t r = 0; r < n; ++r) {
            ds.features.at(r, j) = (ds.features.at(r, j) - mean) * scale;
        }
    }
    return ds;
}

namespace {

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
    unsigned char buf[4];
    if (!f.read(reinterpret_cast<char*>(buf), 4))
        throw LoadError("truncated file: " + path);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw LoadError("cannot open image file: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw LoadError("cannot open label file: " + labels_path);

    if (read_be32(img, images_path) != 0x00000803u)
        throw LoadError("bad image magic in " + images_path);
    const std::uint32_t n_img = read_be32(img, images_path);
    const std::uint32_t rows = read_be32(img, images_path);
    const std::uint32_t cols = read_be32(img, images_path);

    if (read_be32(lab, labels_path) != 0x00000801u)
        throw LoadError("bad label magic in " + labels_path);
    const std::uint32_t n_lab = read_be32(lab, labels_path);

    if (n_img != n_lab)
        throw LoadError("count mismatch: " + images_path + " has " + std::to_string(n_img) +
                        " images but " + labels_path + " has " + std::to_string(n_lab) +
                        " labels");

    const std::size_t d = static_cast<std::size_t>(rows) * cols;
    Dataset ds;
    ds.features = Tensor2(n_img, d);
    ds.labels.resize(n_img);

    std::vector<unsigned char> pixel_row(d);
    int max_label = 0;
    for (std::uint32_t i = 0; i < n_img; ++i) {
        if (!img.read(reinterpret_cast<char*>(pixel_row.data()),
                      static_cast<std::streamsize>(d)))
            throw LoadError("truncated file: " + images_path);
        for (std::size_t j = 0; j < d; ++j) {
            ds.features.at(i, j) = static_cast<double>(pixel_row[j]) / 255.0;
        }
        unsigned char y;
        if (!lab.read(reinterpret_cast<char*>(&y), 1))
            throw LoadError("truncated file: " + labels_path);
        ds.labels[i] = {i, static_cast<int>(y), static_cast<int>(y), LabelStatus::Active};
        max_label = std::max(max_label, static_cast<int>(y));
    }
    ds.class_count = max_label + 1;
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw LoadError("cannot open csv file: " + path);
    std::string line;
    if (!std::getline(f, line)) throw LoadError("empty csv file: " + path);

    std::size_t d = 0;
    {
        std::stringstream header(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(header, col, ',')) cols.push_back(col);
        if (cols.empty() || cols.back() != "label")
            throw LoadError("csv header must end with 'label': " + path);
        d = cols.size() - 1;
    }

    std::vector<double> feats;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw LoadError(path + ": bad number at line " + std::to_string(line_no));
            if (col < d) {
                feats.push_back(v);
            } else {
                labels.push_back(static_cast<int>(v));
            }
            ++col;
        }
        if (col != d + 1)
            throw LoadError(path + ": wrong column count at line " + std::to_string(line_no));
    }

    Dataset ds;
    const std::size_t n = labels.size();
    ds.features = Tensor2(n, d);
    ds.features.values = std::move(feats);
    ds.labels.resize(n);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels[i] = {i, labels[i], labels[i], LabelStatus::Active};
        max_label = std::max(max_label, labels[i]);
    }
    ds.class_count = max_label + 1;
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw LoadError("cannot write csv file: " + path);
    for (std::size_t j = 0; j < ds.features.cols; ++j) f << "f" << j << ",";
    f << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.features.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features.at(i, j));
            f << buf << ",";
        }
        f << ds.labels[i].original_label << "\n";
    }
}

}  // namespace self
