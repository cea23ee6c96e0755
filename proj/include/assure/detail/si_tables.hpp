// si_tables.hpp -- generated by tools/gen_si_tables.py; do not edit.
#pragma once

namespace assure::specfun::detail {

// Si(x) = x * sum_k si_series[k] x^(2k), |x| <= 4
inline constexpr double si_series[] = {
    1.0,
    -5.5555555555555555556e-2,
    1.6666666666666666667e-3,
    -2.8344671201814058957e-5,
    3.061924358220654517e-7,
    -2.2774643986765198886e-9,
    1.2353110643708934307e-11,
    -5.0981091545465443173e-14,
    1.6537983849091298607e-16,
    -4.3266501298022787984e-19,
    9.3204481254244101099e-22,
    -1.681813117665514799e-24,
    2.5787801137537893585e-27,
    -3.4013666162205726476e-30,
    3.8999872022233506661e-33,
    -3.9229840050113482246e-36};

struct AuxPiece {
    double lo;
    double hi;
    int terms;
    double f[24];
    double g[24];
};

// Chebyshev coefficients of x f(x) and x^2 g(x) per piece (c0 already halved)
inline constexpr AuxPiece aux_pieces[] = {
    {4.0, 5.0, 13,
     {9.2947491866288963632e-1, 1.1932782094117790689e-2, -7.3092117836780406477e-4, 3.8927467949253184784e-5, -1.9208333686060190889e-6, 9.0628372128018482983e-8, -4.1650457301334741683e-9, 1.8866999580426705566e-10, -8.4907460398787592997e-12, 3.816520143384889998e-13, -1.7195798472279842427e-14, 7.7844076959270983613e-16, -3.545760660130949795e-17},
     {8.2249429873583588393e-1, 2.6217439734806140518e-2, -1.3639256950906845872e-3, 5.998718536220692581e-5, -2.3677710418467690774e-6, 8.5888953848031875241e-8, -2.8729762540971947741e-9, 8.6863472124733438825e-11, -2.2021477858254368451e-12, 3.2537351179323596848e-14, 1.1024746633877578595e-15, -1.4896988802352357483e-16, 1.0611906408700096805e-17}},
    {5.0, 6.0, 12,
     {9.4867650797802870019e-1, 7.5410582267772579878e-3, -4.0211157227414175031e-4, 1.863347544889923331e-5, -7.9795938150741198108e-7, 3.2548029189409787103e-8, -1.2871213235148956074e-9, 4.9916175791546810726e-11, -1.9133210097847870468e-12, 7.2885935132650794891e-14, -2.7701228215835419025e-15, 1.0532891492823650499e-16},
     {8.6591559152142233156e-1, 1.7651172809878560953e-2, -8.2488664093548677184e-4, 3.2797531611920872023e-5, -1.1786304898161836119e-6, 3.934511220354303027e-8, -1.2352727679472430503e-9, 3.6543663548332992994e-11, -1.0082027115753187065e-12, 2.507992681784506009e-14, -5.0597484138960688343e-16, 0.0}},
    {6.0, 7.0, 12,
     {9.6112353035752133487e-1, 5.042038661277620383e-3, -2.3801492165014226629e-4, 9.7711167262409952423e-6, -3.7037352612725868918e-7, 1.3345431232296790676e-8, -4.6494479093697992967e-10, 1.5835493057505528594e-11, -5.3128389900057116693e-13, 1.7654344996136564972e-14, -5.8335477637292444799e-16, 1.9223821304219569308e-17},
     {8.9567259944379024418e-1, 1.2356607037886066525e-2, -5.2290139919447821008e-4, 1.8915578983632659089e-5, -6.210838284591409112e-7, 1.903830627352664301e-8, -5.5296017889305033371e-10, 1.5327761004980915478e-11, -4.0595220294891851199e-13, 1.021180785664996863e-14, -2.3966939706264586063e-16, 5.0118244327667625928e-18}},
    {7.0, 8.0, 11,
     {9.6961495587574257856e-1, 3.5231674526742597775e-3, -1.4913087339436473824e-4, 5.4965219148195895762e-6, -1.8705149466554951381e-7, 6.0455553778494711809e-9, -1.8863280485355661999e-10, 5.7425585097167136564e-12, -1.7182711532098647752e-13, 5.0802498813912763678e-15, -1.4900469426861019641e-16},
     {9.1681865766509359549e-1, 8.9372929106798231365e-3, -3.4496546125326703599e-4, 1.1426594677217200534e-5, -3.4461978719645994318e-7, 9.732479257534856455e-9, -2.6139414966270382062e-10, 6.7363633702832903342e-12, -1.6733092786593099704e-13, 4.00925036073043056e-15, -9.2318774146432580017e-17}},
    {8.0, 10.0, 13,
     {9.7777872044666242666e-1, 4.4371519866370941969e-3, -3.2515810288797934187e-4, 2.0799945474701663131e-5, -1.2296516534112353387e-6, 6.9027153947475455553e-8, -3.7370767173139863381e-9, 1.9709323188184716308e-10, -1.0196718480831510197e-11, 5.2011568047168970121e-13, -2.6257117325763306834e-14, 1.315752751465757063e-15, -6.5595090323873580108e-17},
     {9.3793489267473739292e-1, 1.1669138987282242035e-2, -7.9439409304630996565e-4, 4.6647065213792380518e-5, -2.5033985674556751383e-6, 1.2620004127161512401e-7, -6.0692094377880590906e-9, 2.8111744666119901879e-10, -1.2616273572731824436e-11, 5.5053351726142599571e-13, -2.3390992722060591751e-14, 9.6687541513745999752e-16, -3.8740037920811316007e-17}},
    {10.0, 12.0, 13,
     {9.8465971615534775751e-1, 2.580301052686158237e-3, -1.5993035531734409514e-4, 8.677101097540651349e-6, -4.3575304565652241206e-7, 2.0790285401167871621e-8, -9.5642496056048971964e-10, 4.2825631715612976931e-11, -1.8786433031896513383e-12, 8.1120863999853290172e-14, -3.4604183898815141821e-15, 1.4623304828378958459e-16, -6.1354123964207188139e-18},
     {9.5631052294469267468e-1, 7.0231373710183456286e-3, -4.1155432816671673213e-4, 2.0910141445368047909e-5, -9.7477627466045029651e-7, 4.2817335082385575255e-8, -1.7989922254750824045e-9, 7.2986946797322561114e-11, -2.8775338018394174426e-12, 1.1072436962032005748e-13, -4.1704544847220127843e-15, 1.5403242461873379618e-16, -5.5826701320302970153e-18}},
    {12.0, 14.0, 12,
     {9.8880366445017081785e-1, 1.6239572294339421729e-3, -8.7075765450920624609e-5, 4.0969455445678912358e-6, -1.7871208919212424558e-7, 7.4133583059105435183e-9, -2.9663064307610881523e-10, 1.155185453850708733e-11, -4.4054478393201527102e-13, 1.652601648823744516e-14, -6.1186089657851582605e-16, 2.2417556076713866848e-17},
     {9.6770682483241897491e-1, 4.5219162580224344317e-3, -2.3201856657395125512e-4, 1.0364236752833516981e-5, -4.2613999453698456665e-7, 1.6550715823841173466e-8, -6.1609684651940772773e-10, 2.2183563918429062582e-11, -7.7743894705004720089e-13, 2.6636256494784642166e-14, -8.9504618895560459141e-16, 2.9565963190655079964e-17}},
    {14.0, 16.0, 12,
     {9.9148246481884356695e-1, 1.0845998888821576009e-3, -5.1184827322470703931e-5, 2.1238880593320542533e-6, -8.1827961197123043086e-8, 3.0011276622971393838e-9, -1.0623756319237972919e-10, 3.6612581490620781605e-12, -1.2356257135322861807e-13, 4.1009520333641587471e-15, -1.342793864291481221e-16, 0.0},
     {9.7522036365828508976e-1, 3.0681547561844805655e-3, -1.3976013661963847429e-4, 5.5606690735665466826e-6, -2.0417840820991064224e-7, 7.0966145496728550855e-9, -2.368053990555220388e-10, 7.6538894255579919894e-12, -2.4106685656332859821e-13, 7.4307154892342025557e-15, -2.2488027832669234223e-16, 6.6980914815619179464e-18}},
    {16.0, 20.0, 14,
     {9.9393374303690450195e-1, 1.3036814818316246468e-3, -1.0426986943100713399e-4, 7.3524160065836405629e-6, -4.8232880490341507785e-7, 3.0165251867471714446e-8, -1.8227811705972875557e-9, 1.0730418912792487004e-10, -6.1882152732132319811e-12, 3.50997657770202196e-13, -1.9639188136983570844e-14, 1.086487928763844294e-15, -5.9539832910140464858e-17, 0.0},
     {9.822112102836769005e-1, 3.7442230713279158527e-3, -2.9160844177898067599e-4, 1.9917435837993591277e-5, -1.2594908789882949661e-6, 7.5585409319817084211e-8, -4.3640938202669123918e-9, 2.4448387822028494136e-10, -1.3365780593735632864e-11, 7.1599022283077829941e-13, -3.7698016962320258569e-14, 1.9554754805192470119e-15, -1.0011812776305199808e-16, 5.0668463158237789502e-18}},
    {20.0, 24.0, 13,
     {9.9591658165915061084e-1, 7.2548539573833571889e-4, -4.8067494143040842299e-5, 2.8136621037556031332e-6, -1.535066916333378449e-7, 7.9963086268704932889e-9, -4.0293916110979389201e-10, 1.9799090101267093386e-11, -9.5369079744454723607e-13, 4.5201255022229640632e-14, -2.113860458882133776e-15, 9.7748371909490241467e-17, 0.0},
     {9.8793970157095208694e-1, 2.1115694737307695872e-3, -1.3728395258278452167e-4, 7.8543798519949385714e-6, -4.1728133612224639715e-7, 2.109304753363744664e-8, -1.028036194274227308e-9, 4.870549543676279692e-11, -2.2553414050653117296e-12, 1.024682443473400925e-13, -4.5809578233770084771e-15, 2.0196403402166973352e-16, -8.7963573672833742857e-18}},
    {24.0, 28.0, 12,
     {9.9706677220090208076e-1, 4.4372486968208590188e-4, -2.5066054920256309751e-5, 1.2527905310844487954e-6, -5.8434612505604766063e-8, 2.6053211931160683318e-9, -1.1247598779316759982e-10, 4.7387495005380419287e-12, -1.9584285426942706727e-13, 7.9680905341855034919e-15, -3.1999949134773635909e-16, 1.2710596482242203029e-17},
     {9.9129968681100123657e-1, 1.3019867797420399796e-3, -7.2522332828223868947e-5, 3.5630860130496677262e-6, -1.6289938642119648946e-7, 7.0993017943660564698e-9, -2.9880074747407771853e-10, 1.2242467100488561082e-11, -4.9086303041693018643e-13, 1.9331321017837697613e-14, -7.4981970833694016031e-16, 2.8704698697178619606e-17}},
    {28.0, 34.0, 13,
     {9.9791564377680487935e-1, 3.9857760419856204264e-4, -2.8517104700308706488e-5, 1.8077076328811932263e-6, -1.0707075761465709585e-7, 6.0683309509865789884e-9, -3.333303675269428437e-10, 1.7882707573807934785e-11, -9.4173726669648731984e-13, 4.8851777572163822136e-14, -2.5025770886730233989e-15, 1.2684795264965925371e-16, -6.3711348393901531664e-18},
     {9.9379811926826671109e-1, 1.1766924857469895e-3, -8.3329844406980424305e-5, 5.2163219990877380231e-6, -3.0442965672843624231e-7, 1.696462107772402634e-8, -9.1437720981630095656e-10, 4.8040968919893153534e-11, -2.4729871737356620847e-12, 1.2517071130983024941e-13, -6.2457601640056637475e-15, 3.0784232651190176586e-16, -1.5010812619075985899e-17}},
    {34.0, 40.0, 12,
     {9.985374993999731978e-1, 2.351398979827883457e-4, -1.4153745893470789611e-5, 7.5548818135761869784e-7, -3.7712366689161597741e-8, 1.8028265057915098916e-9, -8.3591493088372978482e-11, 3.78812336291375122e-12, -1.6861458877831016178e-13, 7.3970958097793906975e-15, -3.2062355982739384838e-16, 1.3756304709410278859e-17},
     {9.9563783493746457437e-1, 6.9743381196435779641e-4, -4.1672679122213376171e-5, 2.2043006118959837341e-6, -1.0886142866619013043e-7, 5.1404203153592120195e-9, -2.3506680434064786662e-10, 1.0490348349360780394e-11, -4.5916708507650649558e-13, 1.9780632687876362973e-14, -8.4079591175422553025e-16, 3.5330065200595965861e-17}},
};

} // namespace assure::specfun::detail
