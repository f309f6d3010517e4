#include "mep/success_model.hpp"

namespace mep {

template struct SuccessModel<double>;
template struct SuccessModel<float>;
template std::optional<SuccessModel<double>> train(const TrainingSet<double>&, const SvmOptions&, SvmReport*);
template std::optional<SuccessModel<float>> train(const TrainingSet<float>&, const SvmOptions&, SvmReport*);
template PlattFit<double> fit_platt(std::span<const double>, std::span<const int>, const PlattOptions&);
template PlattFit<float> fit_platt(std::span<const float>, std::span<const int>, const PlattOptions&);
template bool calibrate(SuccessModel<double>&, const TrainingSet<double>&, const PlattOptions&);
template double marginal_success(const SuccessModel<double>&, std::span<const State>);

}  // namespace mep
