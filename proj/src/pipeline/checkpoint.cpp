#include "core/error.hpp"
#include "pipeline/session.hpp"
#include "pipeline/session_state.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace drape {

namespace {

constexpr char kMagic[8] = {'D', 'R', 'A', 'P', 'E', 'C', 'K', '1'};

class Writer {
 public:
  template <class T>
  void pod(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* p, std::size_t n) {
    pod<std::uint64_t>(n);
    buf_.append(static_cast<const char*>(p), n);
  }
  void str(const std::string& s) { bytes(s.data(), s.size()); }
  template <class Derived>
  void matrix(const Eigen::PlainObjectBase<Derived>& m) {
    pod<std::int64_t>(m.rows());
    pod<std::int64_t>(m.cols());
    bytes(m.data(), sizeof(typename Derived::Scalar) * static_cast<std::size_t>(m.size()));
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string data) : buf_(std::move(data)) {}
  template <class T>
  T pod() {
    T v;
    take(&v, sizeof(T));
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > buf_.size() - pos_) fail(ErrorCode::Parse, "checkpoint truncated");
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <class M>
  M matrix() {
    const auto rows = pod<std::int64_t>(), cols = pod<std::int64_t>();
    const auto n = pod<std::uint64_t>();
    if (rows < 0 || cols < 0 || n != sizeof(typename M::Scalar) * static_cast<std::uint64_t>(rows * cols))
      fail(ErrorCode::Parse, "checkpoint matrix header is inconsistent");
    M m(rows, cols);
    take(m.data(), n);
    return m;
  }
  void take(void* p, std::size_t n) {
    if (n > buf_.size() - pos_) fail(ErrorCode::Parse, "checkpoint truncated");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

void write_mesh(Writer& w, const SurfaceMesh& mesh) {
  w.matrix(mesh.vertices());
  w.pod<std::uint64_t>(mesh.faces().size());
  for (const Face& f : mesh.faces()) {
    w.pod<std::int32_t>(f.size);
    for (int k = 0; k < 4; ++k) w.pod<std::int32_t>(f.v[static_cast<std::size_t>(k)]);
  }
}

SurfaceMesh read_mesh(Reader& r) {
  Points v = r.matrix<Points>();
  const auto nf = r.pod<std::uint64_t>();
  std::vector<Face> faces;
  faces.reserve(static_cast<std::size_t>(nf));
  for (std::uint64_t i = 0; i < nf; ++i) {
    Face f;
    f.size = r.pod<std::int32_t>();
    for (int k = 0; k < 4; ++k) f.v[static_cast<std::size_t>(k)] = r.pod<std::int32_t>();
    faces.push_back(f);
  }
  return SurfaceMesh(std::move(v), std::move(faces));
}

}  // namespace

void DrapeSession::save_checkpoint(const std::filesystem::path& path) const {
  const State& s = *s_;
  Writer w;
  for (char c : kMagic) w.pod(c);
  w.str(format_config(s.config));
  write_mesh(w, s.source);
  w.pod<std::int32_t>(static_cast<std::int32_t>(s.target.kind()));
  w.pod<std::uint64_t>(s.target.dense_samples());
  write_mesh(w, s.target.geometry());
  w.pod<std::int64_t>(s.t);
  w.pod<std::int32_t>(static_cast<std::int32_t>(s.status));
  w.pod<std::uint8_t>(s.initialized ? 1 : 0);
  if (s.initialized) {
    w.matrix(s.init);
    w.pod<std::uint64_t>(s.corr.size());
    for (const Correspondence& c : s.corr.pairs()) {
      w.pod<std::int32_t>(c.source_vertex);
      for (int k = 0; k < 3; ++k) w.pod<double>(c.target_point[k]);
      w.pod<std::int32_t>(static_cast<std::int32_t>(c.kind));
    }
  }
  w.matrix(s.net.parameters());
  w.pod<std::int64_t>(s.adam.step_count());
  w.matrix(s.adam.first_moment());
  w.matrix(s.adam.second_moment());
  w.pod<std::uint64_t>(s.history.size());
  for (const LossReport& h : s.history) w.pod(h);

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write checkpoint " + tmp.string());
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) fail(ErrorCode::Io, "failed writing checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "cannot move checkpoint into place: " + ec.message());
}

DrapeSession DrapeSession::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  Reader r(ss.str());
  for (char c : kMagic)
    if (r.pod<char>() != c) fail(ErrorCode::Parse, path.string() + " is not a checkpoint");

  const DrapeConfig config = parse_config(r.str());
  SurfaceMesh source = read_mesh(r);
  const auto kind = static_cast<TargetKind>(r.pod<std::int32_t>());
  const auto dense = static_cast<std::size_t>(r.pod<std::uint64_t>());
  SurfaceMesh geometry = read_mesh(r);
  TargetShape target = kind == TargetKind::Mesh          ? TargetShape::from_mesh(std::move(geometry), dense)
                       : kind == TargetKind::PolygonSoup ? TargetShape::from_soup(std::move(geometry), dense)
                                                         : TargetShape::from_points(geometry.vertices());

  auto state = std::make_unique<State>(std::move(source), std::move(target), config);
  State& s = *state;
  s.t = r.pod<std::int64_t>();
  s.status = static_cast<SessionStatus>(r.pod<std::int32_t>());
  // A session interrupted mid-run comes back paused.
  if (s.status == SessionStatus::Running) s.status = SessionStatus::Paused;
  if (r.pod<std::uint8_t>()) {
    Points init = r.matrix<Points>();
    if (static_cast<std::size_t>(init.rows()) != s.source.vertex_count())
      fail(ErrorCode::Parse, "checkpoint initial deformation has the wrong size");
    const auto n = r.pod<std::uint64_t>();
    std::vector<Correspondence> pairs;
    for (std::uint64_t i = 0; i < n; ++i) {
      Correspondence c;
      c.source_vertex = r.pod<std::int32_t>();
      for (int k = 0; k < 3; ++k) c.target_point[k] = r.pod<double>();
      c.kind = static_cast<CorrespondenceKind>(r.pod<std::int32_t>());
      pairs.push_back(c);
    }
    s.corr = CorrespondenceSet(std::move(pairs));
    s.corr.validate(s.source.vertex_count());
    s.set_initial(std::move(init));
  }
  Eigen::VectorXf params = r.matrix<Eigen::VectorXf>();
  if (params.size() != s.net.parameter_count()) fail(ErrorCode::Parse, "checkpoint network size mismatch");
  s.net.parameters() = std::move(params);
  const long step = r.pod<std::int64_t>();
  Eigen::VectorXf m = r.matrix<Eigen::VectorXf>();
  Eigen::VectorXf v = r.matrix<Eigen::VectorXf>();
  s.adam.restore(step, std::move(m), std::move(v));
  const auto nh = r.pod<std::uint64_t>();
  s.history.resize(static_cast<std::size_t>(nh));
  for (auto& h : s.history) h = r.pod<LossReport>();
  if (s.t < 0 || s.t > s.config.iterations || s.history.size() != static_cast<std::size_t>(s.t))
    fail(ErrorCode::Parse, "checkpoint iteration state is inconsistent");
  return DrapeSession(std::move(state));
}

}  // namespace drape
