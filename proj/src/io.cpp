#include "dk/io.hpp"

#include <cmath>

namespace dk::io {

namespace {

std::string join(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

template <class Fn>
auto guarded(const std::string& ptr, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(ptr, e.what());
  }
}

void check_length(const Vec& v, int dimension, const std::string& ptr) {
  if (static_cast<int>(v.size()) != dimension)
    throw ConfigError(ptr, "expected " + std::to_string(dimension) + " entries, got " + std::to_string(v.size()));
}

}  // namespace

const json& field(const json& j, const std::string& key, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ptr, "missing required field \"" + key + "\"");
  return *it;
}

double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
  return v;
}

double number_field(const json& j, const std::string& key, const std::string& ptr) {
  return number(field(j, key, ptr), join(ptr, key));
}

double number_field(const json& j, const std::string& key, const std::string& ptr, double fallback) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  return j.contains(key) ? number(j.at(key), join(ptr, key)) : fallback;
}

long long integer(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) throw ConfigError(ptr, "expected an integer");
  return j.get<long long>();
}

Vec vector(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw ConfigError(ptr, "expected an array of numbers");
  Vec out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], join(ptr, std::to_string(i))));
  return out;
}

AtomicMeasure measure_from_json(const json& j, const std::string& ptr) {
  const long long d = integer(field(j, "dimension", ptr), join(ptr, "dimension"));
  if (d < 1) throw ConfigError(join(ptr, "dimension"), "dimension must be >= 1");
  const json& atoms = field(j, "atoms", ptr);
  const std::string aptr = join(ptr, "atoms");
  if (!atoms.is_array()) throw ConfigError(aptr, "expected an array of atoms");
  AtomicMeasure mu(static_cast<int>(d));
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string ip = join(aptr, std::to_string(i));
    const Vec x = vector(field(atoms[i], "x", ip), join(ip, "x"));
    check_length(x, static_cast<int>(d), join(ip, "x"));
    const double w = number_field(atoms[i], "w", ip);
    if (!(w > 0.0)) throw ConfigError(join(ip, "w"), "atom weight must be > 0");
    mu.add_atom(x, w);
  }
  return mu;
}

json to_json(const AtomicMeasure& mu) {
  json atoms = json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto x = mu.location(i);
    atoms.push_back({{"x", Vec(x.begin(), x.end())}, {"w", mu.weight(i)}});
  }
  return {{"dimension", mu.dimension()}, {"atoms", atoms}};
}

SmoothFunction function_from_json(const json& j, const std::string& ptr, int dimension) {
  const json& kind_json = field(j, "kind", ptr);
  if (!kind_json.is_string()) throw ConfigError(join(ptr, "kind"), "expected a string");
  const auto kind = smooth_kind_from_string(kind_json.get<std::string>());
  if (!kind) throw ConfigError(join(ptr, "kind"), "unknown function kind \"" + kind_json.get<std::string>() + "\"");

  auto vec_field = [&](const std::string& key) {
    Vec v = vector(field(j, key, ptr), join(ptr, key));
    check_length(v, dimension, join(ptr, key));
    return v;
  };
  return guarded(ptr, [&] {
    switch (*kind) {
      case SmoothKind::constant:
        return SmoothFunction::constant(dimension, number_field(j, "value", ptr));
      case SmoothKind::gaussian_bump:
        return SmoothFunction::gaussian_bump(vec_field("center"), number_field(j, "width", ptr),
                                             number_field(j, "amplitude", ptr, 1.0));
      case SmoothKind::cosine_wave:
        return SmoothFunction::cosine_wave(vec_field("wavevector"), number_field(j, "amplitude", ptr, 1.0),
                                           number_field(j, "phase", ptr, 0.0));
      case SmoothKind::compact_bump_product:
        return SmoothFunction::compact_bump_product(vec_field("center"), vec_field("radii"),
                                                    number_field(j, "amplitude", ptr, 1.0));
      case SmoothKind::plateau_product:
        return SmoothFunction::plateau_product(dimension, number_field(j, "inner", ptr),
                                               number_field(j, "outer", ptr));
      case SmoothKind::affine:
        return SmoothFunction::affine(vec_field("slope"), number_field(j, "offset", ptr, 0.0));
      case SmoothKind::quadratic:
        return SmoothFunction::quadratic(vec_field("center"), number_field(j, "scale", ptr, 1.0));
    }
    throw ConfigError(join(ptr, "kind"), "unsupported function kind");
  });
}

json to_json(const SmoothFunction& phi) {
  json j = {{"kind", std::string(to_string(phi.kind()))}};
  switch (phi.kind()) {
    case SmoothKind::constant:
      j["value"] = phi.amplitude();
      break;
    case SmoothKind::gaussian_bump:
      j["center"] = phi.center();
      j["width"] = phi.scales().at(0);
      j["amplitude"] = phi.amplitude();
      break;
    case SmoothKind::cosine_wave:
      j["wavevector"] = phi.wavevector();
      j["amplitude"] = phi.amplitude();
      j["phase"] = phi.phase();
      break;
    case SmoothKind::compact_bump_product:
      j["center"] = phi.center();
      j["radii"] = phi.scales();
      j["amplitude"] = phi.amplitude();
      break;
    case SmoothKind::plateau_product:
      j["inner"] = phi.inner();
      j["outer"] = phi.outer();
      break;
    case SmoothKind::affine:
      j["slope"] = phi.wavevector();
      j["offset"] = phi.amplitude();
      break;
    case SmoothKind::quadratic:
      j["center"] = phi.center();
      j["scale"] = phi.amplitude();
      break;
  }
  return j;
}

namespace {

Vec matrix(const json& j, const std::string& ptr, int p) {
  Vec out;
  if (!j.is_array() || static_cast<int>(j.size()) != p) throw ConfigError(ptr, "expected a square matrix of size arity");
  for (int r = 0; r < p; ++r) {
    const std::string rp = join(ptr, std::to_string(r));
    const Vec row = vector(j[static_cast<std::size_t>(r)], rp);
    check_length(row, p, rp);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

OuterMap::Factor factor_from_json(const json& j, const std::string& ptr) {
  OuterMap::Factor f;
  const json& k = field(j, "kind", ptr);
  const std::string name = k.is_string() ? k.get<std::string>() : "";
  if (name == "linear") {
    f.kind = OuterMap::Factor::Kind::linear;
  } else if (name == "sine") {
    f.kind = OuterMap::Factor::Kind::sine;
  } else if (name == "tanh") {
    f.kind = OuterMap::Factor::Kind::tanh;
  } else {
    throw ConfigError(join(ptr, "kind"), "factor kind must be linear, sine or tanh");
  }
  f.a = number_field(j, "a", ptr, 1.0);
  f.b = number_field(j, "b", ptr, 0.0);
  f.c = number_field(j, "c", ptr, 0.0);
  return f;
}

}  // namespace

OuterMap outer_from_json(const json& j, const std::string& ptr, int arity) {
  const json& kind_json = field(j, "kind", ptr);
  const std::string kind = kind_json.is_string() ? kind_json.get<std::string>() : "";
  auto linear_part = [&] {
    Vec a = j.contains("a") ? vector(j.at("a"), join(ptr, "a")) : Vec(static_cast<std::size_t>(arity), 0.0);
    check_length(a, arity, join(ptr, "a"));
    return a;
  };
  return guarded(ptr, [&] {
    if (kind == "linear") return OuterMap::linear(linear_part(), number_field(j, "c", ptr, 0.0));
    if (kind == "quadratic")
      return OuterMap::quadratic(matrix(field(j, "Q", ptr), join(ptr, "Q"), arity), linear_part(),
                                 number_field(j, "c", ptr, 0.0));
    if (kind == "saturated_quadratic")
      return OuterMap::saturated_quadratic(matrix(field(j, "Q", ptr), join(ptr, "Q"), arity), linear_part(),
                                           number_field(j, "c", ptr, 0.0), number_field(j, "saturation", ptr));
    if (kind == "product") {
      const json& fs = field(j, "factors", ptr);
      const std::string fp = join(ptr, "factors");
      if (!fs.is_array() || static_cast<int>(fs.size()) != arity)
        throw ConfigError(fp, "expected one factor per inner function");
      std::vector<OuterMap::Factor> factors;
      for (std::size_t i = 0; i < fs.size(); ++i) factors.push_back(factor_from_json(fs[i], join(fp, std::to_string(i))));
      return OuterMap::product(std::move(factors));
    }
    throw ConfigError(join(ptr, "kind"), "outer kind must be linear, quadratic, saturated_quadratic or product");
  });
}

json to_json(const OuterMap& f) {
  const int p = f.arity();
  auto rows = [&] {
    json m = json::array();
    for (int r = 0; r < p; ++r)
      m.push_back(Vec(f.quadratic_form().begin() + r * p, f.quadratic_form().begin() + (r + 1) * p));
    return m;
  };
  switch (f.kind()) {
    case OuterMap::Kind::linear:
      return {{"kind", "linear"}, {"a", f.linear_part()}, {"c", f.constant_part()}};
    case OuterMap::Kind::quadratic:
      return {{"kind", "quadratic"}, {"Q", rows()}, {"a", f.linear_part()}, {"c", f.constant_part()}};
    case OuterMap::Kind::saturated_quadratic:
      return {{"kind", "saturated_quadratic"}, {"Q", rows()},           {"a", f.linear_part()},
              {"c", f.constant_part()},        {"saturation", f.saturation()}};
    case OuterMap::Kind::product: {
      json fs = json::array();
      for (const auto& g : f.factors()) {
        const char* name = g.kind == OuterMap::Factor::Kind::linear ? "linear"
                           : g.kind == OuterMap::Factor::Kind::sine ? "sine"
                                                                     : "tanh";
        fs.push_back({{"kind", name}, {"a", g.a}, {"b", g.b}, {"c", g.c}});
      }
      return {{"kind", "product"}, {"factors", fs}};
    }
  }
  return json::object();
}

FunctionalPtr functional_from_json(const json& j, const std::string& ptr, int dimension) {
  const json& fam_json = field(j, "family", ptr);
  const std::string family = fam_json.is_string() ? fam_json.get<std::string>() : "";
  if (family == "zero") return make_zero(dimension);
  if (family == "constant") return make_constant(dimension, number_field(j, "value", ptr));
  if (family == "interaction") {
    SmoothFunction v1 = function_from_json(field(j, "V1", ptr), join(ptr, "V1"), dimension);
    SmoothFunction v2 = function_from_json(field(j, "V2", ptr), join(ptr, "V2"), dimension);
    return guarded(ptr, [&] { return make_interaction(std::move(v1), std::move(v2)); });
  }
  if (family == "cylindrical") {
    const json& in = field(j, "inner", ptr);
    const std::string ip = join(ptr, "inner");
    if (!in.is_array() || in.empty()) throw ConfigError(ip, "expected a nonempty array of functions");
    std::vector<SmoothFunction> inner;
    for (std::size_t i = 0; i < in.size(); ++i)
      inner.push_back(function_from_json(in[i], join(ip, std::to_string(i)), dimension));
    OuterMap outer = outer_from_json(field(j, "outer", ptr), join(ptr, "outer"), static_cast<int>(inner.size()));
    return guarded(ptr, [&] { return make_cylindrical(std::move(outer), std::move(inner)); });
  }
  throw ConfigError(join(ptr, "family"), "family must be zero, constant, interaction or cylindrical");
}

}  // namespace dk::io
