#pragma once

// Frame snapshots and their JSON wire form.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "batchsim/env.hpp"

namespace batchsim::viewer {

using json = nlohmann::json;

struct FrameEntity {
  std::string name;
  Shape<double> shape;
  std::array<double, 2> pos{};
  double rot = 0;
  std::array<double, 3> color{};

  bool operator==(const FrameEntity& o) const {
    return name == o.name && shape.index() == o.shape.index() && shape_json(shape) == shape_json(o.shape) &&
           pos == o.pos && rot == o.rot && color == o.color;
  }

  static json shape_json(const Shape<double>& s) {
    return std::visit(
        [](const auto& v) -> json {
          using S = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<S, Sphere<double>>) {
            return {{"kind", "sphere"}, {"radius", v.radius}};
          } else if constexpr (std::is_same_v<S, Box<double>>) {
            return {{"kind", "box"}, {"length", v.length}, {"width", v.width}};
          } else {
            return {{"kind", "line"}, {"length", v.length}};
          }
        },
        s);
  }
};

struct FrameSnapshot {
  std::uint64_t t = 0;
  std::size_t env = 0;
  std::vector<FrameEntity> entities;
  std::map<std::string, double> hud;

  bool operator==(const FrameSnapshot&) const = default;
};

/// Copies environment `e` of a world. Agents come first, then landmarks, so
/// the order is stable across frames.
template <std::floating_point T>
FrameSnapshot snapshot_of(const World<T>& world, std::size_t e, std::uint64_t t) {
  FrameSnapshot s;
  s.t = t;
  s.env = e;
  for (std::size_t i = 0; i < world.n_entities(); ++i) {
    const Entity<T>& ent = world.entity(i);
    FrameEntity fe;
    fe.name = ent.name;
    fe.shape = std::visit(
        [](const auto& v) -> Shape<double> {
          using S = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<S, Sphere<T>>) {
            return Sphere<double>{static_cast<double>(v.radius)};
          } else if constexpr (std::is_same_v<S, Box<T>>) {
            return Box<double>{static_cast<double>(v.length), static_cast<double>(v.width), v.hollow};
          } else {
            return Line<double>{static_cast<double>(v.length)};
          }
        },
        ent.shape);
    const Vec2<T> p = ent.pos(e);
    fe.pos = {static_cast<double>(p.x), static_cast<double>(p.y)};
    fe.rot = static_cast<double>(ent.state.rot[e]);
    fe.color = {ent.color[0], ent.color[1], ent.color[2]};
    s.entities.push_back(std::move(fe));
  }
  return s;
}

inline std::string encode_frame(const FrameSnapshot& s) {
  json ents = json::array();
  for (const FrameEntity& fe : s.entities) {
    ents.push_back({{"name", fe.name},
                    {"shape", FrameEntity::shape_json(fe.shape)},
                    {"pos", fe.pos},
                    {"rot", fe.rot},
                    {"color", fe.color}});
  }
  json hud = json::object();
  for (const auto& [k, v] : s.hud) hud[k] = v;
  json j = {{"type", "frame"}, {"t", s.t}, {"env", s.env}, {"entities", std::move(ents)}, {"hud", std::move(hud)}};
  return j.dump();
}

/// Inverse of encode_frame; throws json exceptions on malformed input.
inline FrameSnapshot decode_frame(const std::string& text) {
  const json j = json::parse(text);
  require(j.at("type") == "frame", "decode_frame: not a frame message");
  FrameSnapshot s;
  s.t = j.at("t").get<std::uint64_t>();
  s.env = j.at("env").get<std::size_t>();
  for (const json& je : j.at("entities")) {
    FrameEntity fe;
    fe.name = je.at("name").get<std::string>();
    const json& sh = je.at("shape");
    const std::string kind = sh.at("kind").get<std::string>();
    if (kind == "sphere") {
      fe.shape = Sphere<double>{sh.at("radius").get<double>()};
    } else if (kind == "box") {
      fe.shape = Box<double>{sh.at("length").get<double>(), sh.at("width").get<double>()};
    } else {
      require(kind == "line", "decode_frame: unknown shape kind '" + kind + "'");
      fe.shape = Line<double>{sh.at("length").get<double>()};
    }
    fe.pos = je.at("pos").get<std::array<double, 2>>();
    fe.rot = je.at("rot").get<double>();
    fe.color = je.at("color").get<std::array<double, 3>>();
    s.entities.push_back(std::move(fe));
  }
  for (const auto& [k, v] : j.at("hud").items()) s.hud[k] = v.get<double>();
  return s;
}

}  // namespace batchsim::viewer
