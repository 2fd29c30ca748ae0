#pragma once

#include "sunet/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sunet {

namespace detail {

// Orthonormal Daubechies low-pass filters with M = 1..10 vanishing moments,
// normalized to sum sqrt(2) (extremal-phase root selection).
inline const std::vector<std::vector<long double>>& daubechies_table() {
  static const std::vector<std::vector<long double>> table = {
    // M = 1
    {
      0.7071067811865475244008444L,
      0.7071067811865475244008444L},
    // M = 2
    {
      0.4829629131445341433748716L,
      0.8365163037378079055752938L,
      0.2241438680420133810259728L,
      -0.1294095225512603811744494L},
    // M = 3
    {
      0.3326705529500826159985116L,
      0.8068915093110925764944936L,
      0.4598775021184915700951519L,
      -0.1350110200102545886963899L,
      -0.08544127388202666169281917L,
      0.03522629188570953660274066L},
    // M = 4
    {
      0.2303778133088965008632912L,
      0.714846570552915647089922L,
      0.6308807679298589078817163L,
      -0.02798376941685985421141375L,
      -0.1870348117190930840795707L,
      0.03084138183556076362721936L,
      0.03288301166688519973540751L,
      -0.01059740178506903210488321L},
    // M = 5
    {
      0.1601023979741929144807237L,
      0.6038292697971896705401193L,
      0.7243085284377729277280712L,
      0.1384281459013207315053971L,
      -0.2422948870663820318625714L,
      -0.03224486958463837464847976L,
      0.07757149384004571352313049L,
      -0.006241490212798274274190519L,
      -0.01258075199908199946850974L,
      0.003335725285473771277998183L},
    // M = 6
    {
      0.1115407433501094636213239L,
      0.4946238903984530856772042L,
      0.7511339080210953506789345L,
      0.3152503517091976290859897L,
      -0.2262646939654398200763145L,
      -0.1297668675672619355622896L,
      0.09750160558732304910234355L,
      0.02752286553030572862554084L,
      -0.03158203931748602956507908L,
      0.0005538422011614961392519184L,
      0.004777257510945510639635975L,
      -0.001077301085308479564852622L},
    // M = 7
    {
      0.07785205408500917901996352L,
      0.3965393194819173065390004L,
      0.7291320908462351199169431L,
      0.4697822874051931224715912L,
      -0.1439060039285649754050684L,
      -0.2240361849938749826381404L,
      0.07130921926683026475087657L,
      0.08061260915108307191292248L,
      -0.03802993693501441357959206L,
      -0.01657454163066688065410767L,
      0.01255099855609984061298989L,
      0.0004295779729213665211321291L,
      -0.001801640704047490915268263L,
      0.0003537137999745202484462958L},
    // M = 8
    {
      0.05441584224310400995500941L,
      0.3128715909142999706591624L,
      0.6756307362972898068078008L,
      0.5853546836542067127712655L,
      -0.01582910525634930566738055L,
      -0.2840155429615469265162031L,
      0.00047248457391328277036059L,
      0.1287474266204784588570293L,
      -0.01736930100180754616961615L,
      -0.04408825393079475150676372L,
      0.01398102791739828164872293L,
      0.008746094047405776716382743L,
      -0.004870352993451574310422182L,
      -0.0003917403733769470462980804L,
      0.0006754494064505693663695476L,
      -0.0001174767841247695337306282L},
    // M = 9
    {
      0.03807794736387834658869766L,
      0.2438346746125903537320416L,
      0.6048231236901111119030769L,
      0.6572880780513005380782126L,
      0.1331973858250075761909549L,
      -0.2932737832791749088064032L,
      -0.09684078322297646051350813L,
      0.1485407493381063801350727L,
      0.0307256814793333792123174L,
      -0.06763282906132997367564227L,
      0.0002509471148314519575871897L,
      0.02236166212367909720537378L,
      -0.004723204757751397277925708L,
      -0.004281503682463429834496795L,
      0.001847646883056226476619129L,
      0.0002303857635231959672052164L,
      -0.0002519631889427101369749887L,
      0.00003934732031627159948068988L},
    // M = 10
    {
      0.02667005790055555358661745L,
      0.188176800077691489020893L,
      0.5272011889317255864817448L,
      0.6884590394536035657418718L,
      0.281172343660577460748727L,
      -0.2498464243273153794161019L,
      -0.1959462743773770435042993L,
      0.1273693403357932600826772L,
      0.09305736460357235116035229L,
      -0.07139414716639708714533609L,
      -0.02945753682187581285828324L,
      0.03321267405934100173976365L,
      0.003606553566956169655423291L,
      -0.01073317548333057504431811L,
      0.001395351747052901165789318L,
      0.001992405295185056117158742L,
      -0.000685856694959711626561371L,
      -0.000116466855129285450951481L,
      0.00009358867032006959133405013L,
      -0.00001326420289452124481243668L},
  };
  return table;
}

}  // namespace detail

constexpr int kMaxVanishingMoments = 10;

/// Conjugate-mirror filter pair of a Daubechies basis in dimension d.
///
/// In 1-D, `h` is the low-pass filter indexed 0..2M-1 and `g[0]` is the
/// high-pass filter g[l] = (-1)^l h[2M-1-l]. In 2-D, `h` is h (x) h and the
/// detail filters are h (x) g, g (x) h and g (x) g, in that order.
template <typename Scalar>
struct FilterBank {
  int vanishing_moments = 1;
  int dim = 1;
  DTensor<Scalar> h;
  std::vector<DTensor<Scalar>> g;

  int detail_channels() const { return (1 << dim) - 1; }
};

template <typename Scalar>
void validate_filter_bank(const FilterBank<Scalar>& bank) {
  using std::abs;
  auto fail = [&](const std::string& what) {
    throw std::logic_error("Daubechies M=" + std::to_string(bank.vanishing_moments) + ": " + what);
  };
  const Scalar dc = std::pow(Scalar(2), Scalar(bank.dim) / 2);
  if (abs(bank.h.values().sum() - dc) > Scalar(1e-10)) fail("low-pass DC gain");
  if (abs(bank.h.values().square().sum() - 1) > Scalar(1e-12)) fail("low-pass norm");
  const Eigen::Index taps_per_axis = 2 * bank.vanishing_moments;
  if (bank.h.size() > (bank.dim == 1 ? taps_per_axis : taps_per_axis * taps_per_axis)) fail("support size");
  for (const auto& g : bank.g) {
    if (abs(g.values().square().sum() - 1) > Scalar(1e-12)) fail("high-pass norm");
    if (g.size() != bank.h.size()) fail("support mismatch");
  }
}

/// Daubechies filter bank with M vanishing moments (1 <= M <= 10), d in {1, 2}.
template <typename Scalar = double>
FilterBank<Scalar> daubechies_filters(int M, int d) {
  if (M < 1 || M > kMaxVanishingMoments)
    throw std::invalid_argument("daubechies_filters: M must be in 1..10, got " + std::to_string(M));
  if (d != 1 && d != 2) throw std::invalid_argument("daubechies_filters: d must be 1 or 2");
  const auto& taps = detail::daubechies_table()[M - 1];
  const auto L = static_cast<Eigen::Index>(taps.size());
  auto h = DTensor<Scalar>::zeros1(0, L - 1);
  auto g = DTensor<Scalar>::zeros1(0, L - 1);
  for (Eigen::Index l = 0; l < L; ++l) {
    h(l) = static_cast<Scalar>(taps[l]);
    g(l) = static_cast<Scalar>((l % 2 == 0 ? 1 : -1) * taps[L - 1 - l]);
  }
  FilterBank<Scalar> bank;
  bank.vanishing_moments = M;
  bank.dim = d;
  if (d == 1) {
    bank.h = h;
    bank.g = {g};
  } else {
    bank.h = tensor_product(h, h);
    bank.g = {tensor_product(h, g), tensor_product(g, h), tensor_product(g, g)};
  }
  validate_filter_bank(bank);
  return bank;
}

}  // namespace sunet
