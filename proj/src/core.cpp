#include "fqm/core.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace fqm {

namespace {

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same_grid(const WaveFunction& a, const WaveFunction& b, const char* op) {
    if (a.grid() != b.grid()) {
        throw std::invalid_argument(std::string(op) + ": wavefunctions live on different grids");
    }
    if (a.representation() != b.representation()) {
        throw std::invalid_argument(std::string(op) + ": representation mismatch");
    }
}

}  // namespace

PhysicalParams::PhysicalParams(double alpha, double d_alpha, double hbar)
    : alpha_(alpha), d_alpha_(d_alpha), hbar_(hbar) {
    if (!(alpha > 1.0 && alpha <= 2.0)) {
        std::ostringstream msg;
        msg << "alpha must satisfy 1 < alpha <= 2, got " << alpha;
        throw std::invalid_argument(msg.str());
    }
    if (!(d_alpha > 0.0) || !std::isfinite(d_alpha)) {
        throw std::invalid_argument("d_alpha must be positive");
    }
    if (!(hbar > 0.0) || !std::isfinite(hbar)) {
        throw std::invalid_argument("hbar must be positive");
    }
}

double SpatialGrid::volume() const noexcept { return std::pow(extent_, dim_); }

std::array<Eigen::Index, 3> SpatialGrid::unflatten(Eigen::Index node) const noexcept {
    std::array<Eigen::Index, 3> idx{0, 0, 0};
    for (int axis = 0; axis < dim_; ++axis) {
        idx[axis] = node % points_;
        node /= points_;
    }
    return idx;
}

Eigen::Index SpatialGrid::flatten(const std::array<Eigen::Index, 3>& idx) const noexcept {
    Eigen::Index node = 0;
    for (int axis = dim_ - 1; axis >= 0; --axis) {
        node = node * points_ + idx[axis];
    }
    return node;
}

Eigen::Index SpatialGrid::mirror(Eigen::Index node) const noexcept {
    auto idx = unflatten(node);
    for (int axis = 0; axis < dim_; ++axis) {
        idx[axis] = (points_ - idx[axis]) % points_;
    }
    return flatten(idx);
}

Eigen::Vector3d SpatialGrid::position(Eigen::Index node) const noexcept {
    const auto idx = unflatten(node);
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    for (int axis = 0; axis < dim_; ++axis) {
        r[axis] = coordinate(idx[axis]);
    }
    return r;
}

SpatialGrid make_grid(int dim, Eigen::Index points_per_axis, double extent_per_axis) {
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    }
    if (!is_power_of_two(points_per_axis) || points_per_axis < 8) {
        std::ostringstream msg;
        msg << "points per axis must be a power of two >= 8, got " << points_per_axis;
        throw std::invalid_argument(msg.str());
    }
    if (!(extent_per_axis > 0.0) || !std::isfinite(extent_per_axis)) {
        throw std::invalid_argument("grid extent must be positive");
    }
    SpatialGrid grid;
    grid.dim_ = dim;
    grid.points_ = points_per_axis;
    grid.extent_ = extent_per_axis;
    // Division by a power of two is exact, so spacing * points == extent.
    grid.spacing_ = extent_per_axis / static_cast<double>(points_per_axis);
    grid.size_ = 1;
    for (int axis = 0; axis < dim; ++axis) {
        grid.size_ *= points_per_axis;
    }
    grid.cell_volume_ = std::pow(grid.spacing_, dim);
    return grid;
}

MomentumGrid::MomentumGrid(const SpatialGrid& grid, double hbar)
    : grid_(grid), hbar_(hbar), quantum_(2.0 * M_PI * hbar / grid.extent()) {}

Eigen::Vector3d MomentumGrid::momentum(Eigen::Index node) const noexcept {
    const auto idx = grid_.unflatten(node);
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int axis = 0; axis < grid_.dim(); ++axis) {
        p[axis] = axis_momentum(idx[axis]);
    }
    return p;
}

RealField MomentumGrid::squared_magnitude() const {
    RealField out(grid_.size());
    for (Eigen::Index node = 0; node < grid_.size(); ++node) {
        out[node] = momentum(node).squaredNorm();
    }
    return out;
}

RealField MomentumGrid::odd_component(int axis) const {
    RealField out(grid_.size());
    for (Eigen::Index node = 0; node < grid_.size(); ++node) {
        const auto idx = grid_.unflatten(node);
        out[node] = is_nyquist(idx[axis]) ? 0.0 : axis_momentum(idx[axis]);
    }
    return out;
}

WaveFunction::WaveFunction(SpatialGrid grid, ComplexField amplitudes, Representation representation)
    : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)), representation_(representation) {
    if (amplitudes_.size() != grid_.size()) {
        throw std::invalid_argument("amplitude count does not match grid size");
    }
    require_finite(amplitudes_, "wavefunction");
}

WaveFunction WaveFunction::zero(const SpatialGrid& grid) {
    return WaveFunction(grid, ComplexField::Zero(grid.size()));
}

WaveFunction WaveFunction::from_function(const SpatialGrid& grid,
                                         const std::function<Complex(const Eigen::Vector3d&)>& f) {
    ComplexField values(grid.size());
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
        values[node] = f(grid.position(node));
    }
    return WaveFunction(grid, std::move(values));
}

double WaveFunction::norm_squared() const {
    return amplitudes_.abs2().sum() * grid_.cell_volume();
}

WaveFunction normalize(const WaveFunction& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) {
        throw std::invalid_argument("cannot normalize a zero-norm wavefunction");
    }
    return WaveFunction(psi.grid(), psi.amplitudes() / n, psi.representation());
}

Complex inner_product(const WaveFunction& phi, const WaveFunction& chi) {
    require_same_grid(phi, chi, "inner_product");
    return (phi.amplitudes().conjugate() * chi.amplitudes()).sum() * phi.grid().cell_volume();
}

WaveFunction operator*(Complex factor, const WaveFunction& psi) {
    return WaveFunction(psi.grid(), factor * psi.amplitudes(), psi.representation());
}

WaveFunction operator+(const WaveFunction& a, const WaveFunction& b) {
    require_same_grid(a, b, "operator+");
    return WaveFunction(a.grid(), a.amplitudes() + b.amplitudes(), a.representation());
}

WaveFunction operator-(const WaveFunction& a, const WaveFunction& b) {
    require_same_grid(a, b, "operator-");
    return WaveFunction(a.grid(), a.amplitudes() - b.amplitudes(), a.representation());
}

PotentialSpec PotentialSpec::free(std::string label) {
    return PotentialSpec{FreePotential{}, std::move(label)};
}

PotentialSpec PotentialSpec::power_law(double q2, double beta, std::string label) {
    if (!(q2 > 0.0) || !std::isfinite(q2)) {
        throw std::invalid_argument("power-law potential needs q2 > 0");
    }
    if (!(beta > 1.0 && beta <= 2.0)) {
        std::ostringstream msg;
        msg << "power-law exponent must satisfy 1 < beta <= 2, got " << beta;
        throw std::invalid_argument(msg.str());
    }
    return PotentialSpec{PowerLawPotential{q2, beta}, std::move(label)};
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> samples, std::string label) {
    return PotentialSpec{TabulatedPotential{std::move(samples)}, std::move(label)};
}

PotentialField::PotentialField(SpatialGrid grid, RealField values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw std::invalid_argument("potential sample count does not match grid size");
    }
    if (!values_.allFinite()) {
        throw std::invalid_argument("potential must be finite everywhere");
    }
}

bool PotentialField::is_even() const {
    for (Eigen::Index node = 0; node < grid_.size(); ++node) {
        if (values_[node] != values_[grid_.mirror(node)]) return false;
    }
    return true;
}

PotentialField sample_potential(const PotentialSpec& spec, const SpatialGrid& grid) {
    RealField values = RealField::Zero(grid.size());
    if (const auto* law = std::get_if<PowerLawPotential>(&spec.shape)) {
        // Re-validate: the struct may have been filled in directly.
        PotentialSpec::power_law(law->q2, law->beta);
        for (Eigen::Index node = 0; node < grid.size(); ++node) {
            values[node] = law->q2 * std::pow(grid.radius(node), law->beta);
        }
    } else if (const auto* table = std::get_if<TabulatedPotential>(&spec.shape)) {
        if (static_cast<Eigen::Index>(table->samples.size()) != grid.size()) {
            std::ostringstream msg;
            msg << "tabulated potential has " << table->samples.size() << " samples, grid has "
                << grid.size() << " nodes";
            throw std::invalid_argument(msg.str());
        }
        values = Eigen::Map<const RealField>(table->samples.data(), grid.size());
    }
    return PotentialField(grid, std::move(values));
}

void require_finite(const ComplexField& field, const std::string& what) {
    if (!field.real().allFinite() || !field.imag().allFinite()) {
        throw NumericalError(what + ": non-finite amplitude detected");
    }
}

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FQM_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& body) {
    const Eigen::Index workers = std::min<Eigen::Index>(worker_count(), n);
    if (workers <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (Eigen::Index w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (Eigen::Index i = w; i < n; i += workers) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace fqm
