#ifndef LQGAMES_DIMS_HPP
#define LQGAMES_DIMS_HPP

namespace lqgames {

// Index bookkeeping for the per-player stacked state
//   s^i_t = [v; vhat_self(t-1); vhat_others(t-1); x_self(t)]
// and for the public offset stack f_t = (f^0_t, ..., f^{N-1}_t).
//
// Players are 0-based. "Others" of player i are always listed in ascending
// player index with i skipped; every block offset below follows that order.
struct Dims {
  int n_players = 0;
  int horizon = 0;
  int dim_v = 0;  // hidden-state dimension
  int dim_a = 0;  // per-player action dimension

  int n_state() const { return (n_players + 2) * dim_v; }
  int n_noise() const { return n_players * dim_v; }        // [w_others; w_self_next]
  int n_obs() const { return n_players * dim_a + dim_v; }  // [a_self; a_others; x_self]
  int n_actions() const { return n_players * dim_a; }
  int f_own() const { return (n_players - 1) * dim_v; }    // one player's offset block
  int f_stack() const { return n_players * f_own(); }
  int n_ext() const { return dim_v + f_stack() + 1; }      // [vhat; f; 1]

  // rank of player j among the others of player i (0-based, j != i)
  int other_rank(int i, int j) const { return j < i ? j : j - 1; }

  // state block offsets (player-i model)
  int sb_v() const { return 0; }
  int sb_self() const { return dim_v; }
  int sb_other(int i, int j) const { return 2 * dim_v + other_rank(i, j) * dim_v; }
  int sb_x() const { return (n_players + 1) * dim_v; }

  // observation row offsets (player-i model)
  int ob_self() const { return 0; }
  int ob_other(int i, int j) const { return dim_a + other_rank(i, j) * dim_a; }
  int ob_x() const { return n_players * dim_a; }
  int ob_actions() const { return n_players * dim_a; }       // width of the action rows
  int ob_others_width() const { return (n_players - 1) * dim_a; }

  // noise column offsets (player-i model)
  int nz_other(int i, int j) const { return other_rank(i, j) * dim_v; }
  int nz_own_next() const { return (n_players - 1) * dim_v; }

  // f-stack offsets: block of player j, and the slot of player l inside it
  int fb(int j) const { return j * f_own(); }
  int fb_slot(int j, int l) const { return fb(j) + other_rank(j, l) * dim_v; }

  // stacked-action offset of player j
  int ab(int j) const { return j * dim_a; }

  // extended vector [vhat; f; 1]
  int ext_f() const { return dim_v; }
  int ext_const() const { return dim_v + f_stack(); }

  // tilde (conditional) model: state [v; vhat_others], obs [v; a_others]
  int tilde_state() const { return n_players * dim_v; }
  int tilde_obs() const { return dim_v + (n_players - 1) * dim_a; }
  int tb_other(int i, int j) const { return dim_v + other_rank(i, j) * dim_v; }
};

}  // namespace lqgames

#endif
