#pragma once

#include <array>
#include <deque>
#include <string>
#include <vector>

#include "voltsite/common.hpp"
#include "voltsite/geometry.hpp"

namespace voltsite {

// The ten charger classes the system knows about, with their observed
// system-wide frequencies and the sizing scale used by the CSSI metric.
struct PortTypeInfo {
  int index = 0;           // j in 1..10
  double power_kw = 0.0;
  int frequency = 0;       // pt_j, system-wide observed count
  double sizing_scale = 0; // s_j = 0.1 * j
};

class PortCatalog {
 public:
  static const PortCatalog& standard() {
    static const PortCatalog cat;
    return cat;
  }

  int size() const { return 10; }

  const PortTypeInfo& type(int j) const {
    if (j < 1 || j > 10) throw std::invalid_argument("port type index must be in 1..10");
    return types_[j - 1];
  }

  double max_power_kw() const { return types_.back().power_kw; }

  int total_frequency() const {
    int sum = 0;
    for (const auto& t : types_) sum += t.frequency;
    return sum;  // 84
  }

  std::vector<double> frequency_weights() const {
    std::vector<double> w;
    w.reserve(types_.size());
    for (const auto& t : types_) w.push_back(static_cast<double>(t.frequency));
    return w;
  }

 private:
  PortCatalog() {
    constexpr std::array<double, 10> power = {7, 11, 22, 30, 60, 80, 120, 150, 180, 250};
    constexpr std::array<int, 10> freq = {2, 20, 8, 6, 18, 11, 4, 4, 10, 1};
    for (int j = 1; j <= 10; ++j)
      types_[j - 1] = {j, power[j - 1], freq[j - 1], 0.1 * j};
  }

  std::array<PortTypeInfo, 10> types_;
};

struct Port {
  int type = 0;          // catalog index j
  double power_kw = 0.0;
  int occupant = -1;     // vehicle id, -1 when free
};

// A charging site. Queue state is live only inside a simulation run;
// scenario files carry id, location and ports.
struct ChargingStation {
  std::string id;
  Point location;
  std::vector<Port> ports;
  std::deque<int> queue;
  int queue_capacity = 0;

  int free_port_count() const {
    int n = 0;
    for (const auto& p : ports)
      if (p.occupant < 0) ++n;
    return n;
  }
};

inline ChargingStation make_station(std::string id, Point location, int port_type, int port_count,
                                    const PortCatalog& catalog = PortCatalog::standard()) {
  ChargingStation st;
  st.id = std::move(id);
  st.location = location;
  double power = catalog.type(port_type).power_kw;
  st.ports.assign(static_cast<std::size_t>(port_count), Port{port_type, power, -1});
  return st;
}

}  // namespace voltsite
