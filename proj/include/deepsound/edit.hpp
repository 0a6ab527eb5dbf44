#pragma once

#include <vector>

#include "deepsound/audio.hpp"
#include "deepsound/detect.hpp"

namespace deepsound::edit {

inline constexpr double kAttenuationDb = 30.0;

struct RemovalResult {
  audio::Waveform audio;
  double attenuation_db = 0.0;  // achieved voice-band attenuation inside the voiced spans
  double mask_coverage = 0.0;   // fraction of time-frequency bins attenuated
};

/// Time-frequency masking: voice-band bins of every STFT frame overlapping a
/// voiced span are scaled by -30 dB, then resynthesised by weighted
/// overlap-add (Hann, 1024/256). An empty span list returns an exact copy.
RemovalResult remove_voice(const audio::Waveform& w, const std::vector<detect::TimeSpan>& voiced);

/// Unmasked STFT/ISTFT round trip with the same padding and windows as
/// remove_voice.
audio::Waveform overlap_add_identity(const audio::Waveform& w);

/// Mean absolute sample difference plus, for every band, the mean absolute
/// difference of per-frame band energies of the two STFTs.
double audio_remove_loss(const audio::Waveform& a_hat, const audio::Waveform& a_gt,
                         const audio::BandSet& bands);

/// Default four log-spaced subbands.
double audio_remove_loss(const audio::Waveform& a_hat, const audio::Waveform& a_gt);

double audio_gen_mse(const audio::Waveform& a_hat, const audio::Waveform& a_gt);

}  // namespace deepsound::edit
