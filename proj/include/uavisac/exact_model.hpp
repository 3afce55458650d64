#pragma once

#include "uavisac/scenario.hpp"

#include <complex>
#include <vector>

// Array-level link model evaluated with explicit complex arithmetic.
// The UAV carries two vertical uniform linear arrays (transmit below
// receive) with half-wavelength spacing; ground nodes sit at z = 0 and the
// UAV flies at fixed altitude. These routines are the ground truth the
// closed-form bounds in bound_model are checked against.
namespace uavisac::exact {

using cd = std::complex<double>;

double distance(Vec2 q, Vec2 g, double altitude_m);

// Receive/transmit steering vector toward ground point g; entries
// exp(-j*pi*i*H/d), i = 0..num_antennas-1, squared norm = num_antennas.
std::vector<cd> steering(Vec2 q, Vec2 g, double altitude_m, int num_antennas);

// Residual self-interference coupling matrix, rows = receive elements,
// columns = transmit elements. Entry magnitude sqrt(si_coeff); the phase of
// the (tx p, rx q) pair comes from the inter-panel distance
// (wavelength/2) * (num_antennas + q - p).
std::vector<std::vector<cd>> self_interference_matrix(const ScenarioConfig& cfg);

// Sensing beam x = sqrt(p_uav / num_antennas) * steering(target).
std::vector<cd> sensing_beam(const ScenarioConfig& cfg, Vec2 q, double p_uav_w);

// Uplink SINR of device k at UAV position q while the sensing beam is
// transmitted at p_uav_w (full-duplex leakage + target echo act as
// interference).
double exact_comm_sinr(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k);

// Echo SINR of the sensing beam. When active_device >= 0 that device's
// uplink transmission interferes; pass -1 for a silent uplink.
double exact_radar_sinr(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int active_device);

// || H_r x ||^2 for the aligned beam; must equal
// lambda_t * num_antennas * d^-4(q, target) * p_uav_w.
double echo_power(const ScenarioConfig& cfg, Vec2 q, double p_uav_w);

// || H_si x ||^2, the residual loopback power for the aligned beam.
double loopback_power(const ScenarioConfig& cfg, Vec2 q, double p_uav_w);

} // namespace uavisac::exact
